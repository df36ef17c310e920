//! Contaminated data-generating processes with labeled provenance.
//!
//! Each observation is independently drawn from the contamination with
//! probability `epsilon` and from the target otherwise. Labels record the
//! provenance for test assertions only; estimators never see them.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::densities::SmoothDensity;
use crate::error::{Error, Result};

/// A black-box point generator for arbitrary (Huber) contamination.
#[derive(Debug, Clone, PartialEq)]
pub enum ArbitrarySampler {
    /// All mass at one point.
    PointMass { location: f64 },
    /// Uniform on `[location - scale, location + scale]`.
    UniformSpike { location: f64, scale: f64 },
}

impl ArbitrarySampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ArbitrarySampler::PointMass { location } => location,
            ArbitrarySampler::UniformSpike { location, scale } => {
                location + scale * (2.0 * rng.random::<f64>() - 1.0)
            }
        }
    }
}

/// Uniform spike on `[location - scale, location + scale]`; the zero-scale
/// limit degenerates to a point mass.
pub fn adversarial_spike(scale: f64, location: f64) -> Result<ArbitrarySampler> {
    if scale < 0.0 || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "spike scale must be nonnegative, got {scale}"
        )));
    }
    if scale == 0.0 {
        Ok(ArbitrarySampler::PointMass { location })
    } else {
        Ok(ArbitrarySampler::UniformSpike { location, scale })
    }
}

/// The contamination component of a model.
#[derive(Debug, Clone)]
pub enum Contamination {
    /// No contamination (`epsilon` is ignored when sampling).
    None,
    /// A smooth contamination density with an optional declared level
    /// bound `m` at the origin.
    Structured {
        density: SmoothDensity,
        level: Option<f64>,
    },
    /// A black-box sampler without a density.
    Arbitrary(ArbitrarySampler),
}

/// A contaminated data-generating process `(1-ε) target + ε contamination`.
#[derive(Debug, Clone)]
pub struct ContaminatedModel {
    epsilon: f64,
    target: SmoothDensity,
    contamination: Contamination,
}

/// Provenance label attached to each sampled point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Good,
    Contaminated,
}

/// A labeled sample; labels are for test assertions only.
#[derive(Debug, Clone)]
pub struct MixtureSample {
    pub points: Vec<f64>,
    pub labels: Vec<Provenance>,
}

impl ContaminatedModel {
    pub fn new(epsilon: f64, target: SmoothDensity, contamination: Contamination) -> Result<Self> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "contamination proportion must lie in [0, 1/2], got {epsilon}"
            )));
        }
        if let Contamination::Structured {
            density,
            level: Some(m),
        } = &contamination
        {
            let g0 = density.evaluate(0.0);
            if g0 > m + 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "declared level bound m = {m} violated: g(0) = {g0}"
                )));
            }
        }
        Ok(Self {
            epsilon,
            target,
            contamination,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn target(&self) -> &SmoothDensity {
        &self.target
    }

    pub fn contamination(&self) -> &Contamination {
        &self.contamination
    }
}

/// Draw `n` points, each independently contaminated with probability
/// `epsilon`; deterministic given the seed.
pub fn sample_mixture(model: &ContaminatedModel, n: usize, rng_seed: u64) -> Result<MixtureSample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let target_sampler = crate::densities::RejectionSampler::prepare(&model.target)?;
    let structured_sampler = match &model.contamination {
        Contamination::Structured { density, .. } => {
            Some((crate::densities::RejectionSampler::prepare(density)?, density))
        }
        _ => None,
    };

    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let contaminated = model.epsilon > 0.0
            && !matches!(model.contamination, Contamination::None)
            && rng.random::<f64>() < model.epsilon;
        if contaminated {
            let x = match &model.contamination {
                Contamination::None => unreachable!(),
                Contamination::Structured { .. } => {
                    let (sampler, density) = structured_sampler.as_ref().unwrap();
                    sampler.draw(density, &mut rng)
                }
                Contamination::Arbitrary(sampler) => sampler.draw(&mut rng),
            };
            points.push(x);
            labels.push(Provenance::Contaminated);
        } else {
            points.push(target_sampler.draw(&model.target, &mut rng));
            labels.push(Provenance::Good);
        }
    }
    Ok(MixtureSample { points, labels })
}

/// Pointwise mixture density `(1-ε) f(x) + ε g(x)`.
///
/// Rejected for arbitrary contamination, which has no density.
pub fn mixture_density(model: &ContaminatedModel, x: f64) -> Result<f64> {
    match &model.contamination {
        Contamination::None => Ok(model.target.evaluate(x)),
        Contamination::Structured { density, .. } => {
            Ok((1.0 - model.epsilon) * model.target.evaluate(x)
                + model.epsilon * density.evaluate(x))
        }
        Contamination::Arbitrary(_) => Err(Error::NoDensity),
    }
}
