//! Smooth densities, the mollifier-based building blocks, Hölder-class
//! verification, and seeded rejection sampling.
//!
//! The two bump functions here are the ingredients of every lower-bound
//! construction in this crate:
//!
//!  - `bump_a`: an even probability density on `[-2, 2]` that vanishes at
//!    the origin, built from two shifted copies of the mollifier;
//!  - `bump_b`: an even, mean-zero perturbation on `[-1, 1]` that is
//!    positive near the origin and negative on the flanks.
//!
//! Hölder membership is verified numerically: the `⌊β⌋`-th derivative is
//! approximated by central finite differences and the Hölder ratio is
//! maximized over a grid.

pub mod pairs;

use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad;

/// Number of cells in the rejection-sampling envelope.
const ENVELOPE_CELLS: usize = 4096;
/// Headroom factor applied to the piecewise-constant envelope.
const ENVELOPE_SLACK: f64 = 1.01;
/// Points used by default verification grids.
pub const VERIFICATION_GRID: usize = 10_000;
/// Default finite-difference step for Hölder verification.
pub const HOLDER_STEP: f64 = 1e-3;
/// Multiplicative slack allowed on claimed Hölder radii.
pub const HOLDER_SLACK: f64 = 1.0 + 1e-3;

/// The mollifier `l(x) = exp(-1/(1-x^2))` on `(-1, 1)`, zero elsewhere.
pub fn mollifier(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

static BUMP_A_NORM: OnceLock<f64> = OnceLock::new();

/// Normalization constant of `bump_a`, `c0 = 1 / (2 ∫ l)`, computed once
/// by quadrature.
pub fn bump_a_norm_const() -> f64 {
    *BUMP_A_NORM.get_or_init(|| {
        let mass = quad::integrate_default(mollifier, -1.0, 1.0);
        1.0 / (2.0 * mass)
    })
}

/// Even density on `[-2, 2]` with `a(0) = 0`: shifted mollifier pair
/// `c0·l(x+1)` on `[-2, 0]` and `c0·l(x-1)` on `[0, 2]`.
pub fn bump_a(x: f64) -> f64 {
    let c0 = bump_a_norm_const();
    if x < 0.0 {
        c0 * mollifier(x + 1.0)
    } else {
        c0 * mollifier(x - 1.0)
    }
}

/// Even, mean-zero bump on `[-1, 1]`: `l(2x)` in the middle, `-l(4x±3)`
/// on the flanks. Positive on `(-1/2, 1/2)`, negative on the outer parts.
pub fn bump_b(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 0.5 {
        mollifier(2.0 * x)
    } else if ax <= 1.0 {
        if x > 0.0 {
            -mollifier(4.0 * x - 3.0)
        } else {
            -mollifier(4.0 * x + 3.0)
        }
    } else {
        0.0
    }
}

/// An evaluable density with claimed Hölder parameters and effective
/// support bounds for numerics. Values are immutable and cheap to clone;
/// the evaluation closure is shared.
#[derive(Clone)]
pub struct SmoothDensity {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: (f64, f64),
    beta: f64,
    holder_radius: f64,
    label: String,
}

impl std::fmt::Debug for SmoothDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothDensity")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("beta", &self.beta)
            .field("holder_radius", &self.holder_radius)
            .finish()
    }
}

impl SmoothDensity {
    pub fn new(
        label: impl Into<String>,
        beta: f64,
        holder_radius: f64,
        support: (f64, f64),
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            support,
            beta,
            holder_radius,
            label: label.into(),
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn holder_radius(&self) -> f64 {
        self.holder_radius
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Total mass over the effective support, by quadrature.
    pub fn mass(&self) -> f64 {
        quad::integrate_default(|x| self.evaluate(x), self.support.0, self.support.1)
    }

    /// Minimum value over a uniform grid; used for nonnegativity checks.
    pub fn grid_min(&self, points: usize) -> f64 {
        grid_min_fn(&*self.eval, self.support.0, self.support.1, points)
    }

    /// Draw `n` points by rejection sampling with a piecewise-constant
    /// envelope; deterministic given the seed.
    pub fn sample(&self, n: usize, rng_seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let sampler = RejectionSampler::prepare(self)?;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        Ok((0..n).map(|_| sampler.draw(self, &mut rng)).collect())
    }
}

pub(crate) fn grid_min_fn(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        min = min.min(f(x));
    }
    min
}

/// Gaussian `N(0, scale^2)` as a `SmoothDensity` with support truncated
/// where the density drops below `1e-16`.
pub fn gaussian_baseline(scale: f64) -> Result<SmoothDensity> {
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gaussian scale must be positive, got {scale}"
        )));
    }
    let norm = 1.0 / (scale * (2.0 * std::f64::consts::PI).sqrt());
    // solve norm * exp(-x^2 / (2 scale^2)) = 1e-16 for the truncation point
    let cutoff = scale * (2.0 * (norm / 1e-16).ln()).sqrt();
    let seminorm_beta2 = gaussian_second_derivative_oscillation(scale);
    Ok(SmoothDensity::new(
        format!("gaussian(scale={scale})"),
        2.0,
        seminorm_beta2 * 1.05,
        (-cutoff, cutoff),
        move |x| norm * (-x * x / (2.0 * scale * scale)).exp(),
    ))
}

/// Oscillation of the second derivative of the `N(0, scale^2)` density:
/// `(1 + 2 e^{-3/2}) / (scale^3 √(2π))`.
fn gaussian_second_derivative_oscillation(scale: f64) -> f64 {
    (1.0 + 2.0 * (-1.5f64).exp()) / (scale.powi(3) * (2.0 * std::f64::consts::PI).sqrt())
}

/// Central finite difference of order `k` with step `step`, evaluated at
/// `x` using the half-offset stencil `Σ (-1)^i C(k,i) f(x + (k/2 - i) step)`.
fn central_difference(f: &dyn Fn(f64) -> f64, x: f64, k: usize, step: f64) -> f64 {
    if k == 0 {
        return f(x);
    }
    let mut acc = 0.0;
    let mut binom = 1.0f64;
    for i in 0..=k {
        let offset = (k as f64 / 2.0 - i as f64) * step;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(x + offset);
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    acc / step.powi(k as i32)
}

/// Numerical Hölder seminorm estimate at smoothness `beta` over `[lo, hi]`.
///
/// The `⌊β⌋`-th derivative is approximated by central differences with the
/// given step; the Hölder ratio `|Δf(x1) - Δf(x2)| / |x1 - x2|^{β-⌊β⌋}` is
/// then maximized over grid pairs. For integer `beta` the exponent is zero
/// and the estimate reduces to the oscillation (max minus min) of the
/// derivative values.
pub fn holder_seminorm_fn(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    beta: f64,
    grid_step: f64,
) -> f64 {
    assert!(grid_step > 0.0, "grid step must be positive");
    assert!(beta > 0.0, "beta must be positive");
    let k = beta.floor() as usize;
    let alpha = beta - k as f64;

    let span = hi - lo;
    // integer beta reduces to an O(points) oscillation scan, so a denser
    // grid is affordable there; the pairwise fractional case stays coarser
    let spacing = if alpha == 0.0 {
        grid_step.max(span / 20_000.0)
    } else {
        grid_step.max(span / 4000.0)
    };
    let points = (span / spacing).ceil() as usize + 1;
    let values: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let x = lo + span * i as f64 / (points - 1) as f64;
            (x, central_difference(f, x, k, grid_step))
        })
        .collect();

    if alpha == 0.0 {
        let max = values.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
        max - min
    } else {
        let mut best = 0.0f64;
        for i in 0..values.len() {
            for j in (i + 1)..values.len() {
                let (x1, v1) = values[i];
                let (x2, v2) = values[j];
                let ratio = (v1 - v2).abs() / (x2 - x1).abs().powf(alpha);
                best = best.max(ratio);
            }
        }
        best
    }
}

/// Hölder seminorm estimate for a `SmoothDensity` over its support.
pub fn holder_seminorm_estimate(density: &SmoothDensity, beta: f64, grid_step: f64) -> f64 {
    holder_seminorm_fn(
        &*density.eval,
        density.support.0,
        density.support.1,
        beta,
        grid_step,
    )
}

/// Outcome of checking a density against its own claims.
#[derive(Debug, Clone)]
pub struct DensityCheck {
    pub grid_min: f64,
    pub mass: f64,
    pub seminorm: f64,
    pub claimed_radius: f64,
}

impl DensityCheck {
    pub fn pass(&self) -> bool {
        self.grid_min >= -1e-12
            && (self.mass - 1.0).abs() <= 1e-8
            && self.seminorm <= self.claimed_radius * HOLDER_SLACK
    }
}

/// Verify the `SmoothDensity` invariants: nonnegative on a dense grid,
/// unit mass by quadrature, and numeric Hölder seminorm within the claim.
pub fn check_smooth_density(density: &SmoothDensity) -> DensityCheck {
    DensityCheck {
        grid_min: density.grid_min(VERIFICATION_GRID),
        mass: density.mass(),
        seminorm: holder_seminorm_estimate(density, density.beta, HOLDER_STEP),
        claimed_radius: density.holder_radius,
    }
}

/// Piecewise-constant envelope over the effective support, used for
/// rejection sampling. Cell heights are `1.01 ×` the maximum of the density
/// at the cell endpoints and midpoint.
pub(crate) struct RejectionSampler {
    lo: f64,
    cell_width: f64,
    heights: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

impl RejectionSampler {
    pub(crate) fn prepare(density: &SmoothDensity) -> Result<Self> {
        let (lo, hi) = density.support;
        if hi <= lo || lo.is_nan() || hi.is_nan() {
            return Err(Error::Infeasible(format!(
                "degenerate support for {}",
                density.label
            )));
        }
        let cell_width = (hi - lo) / ENVELOPE_CELLS as f64;
        let mut heights = Vec::with_capacity(ENVELOPE_CELLS);
        let mut cumulative = Vec::with_capacity(ENVELOPE_CELLS);
        let mut total = 0.0;
        for i in 0..ENVELOPE_CELLS {
            let a = lo + i as f64 * cell_width;
            let b = a + cell_width;
            let mid = 0.5 * (a + b);
            let peak = density
                .evaluate(a)
                .max(density.evaluate(mid))
                .max(density.evaluate(b));
            let height = if peak > 0.0 { ENVELOPE_SLACK * peak } else { 0.0 };
            heights.push(height);
            total += height * cell_width;
            cumulative.push(total);
        }
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::Infeasible(format!(
                "envelope construction failed for {}",
                density.label
            )));
        }
        Ok(Self {
            lo,
            cell_width,
            heights,
            cumulative,
            total,
        })
    }

    pub(crate) fn draw(&self, density: &SmoothDensity, rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let target = rng.random::<f64>() * self.total;
            let cell = self
                .cumulative
                .partition_point(|&c| c < target)
                .min(self.heights.len() - 1);
            let x = self.lo + (cell as f64 + rng.random::<f64>()) * self.cell_width;
            if rng.random::<f64>() * self.heights[cell] <= density.evaluate(x) {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E_INV: f64 = 0.367_879_441_171_442_3;

    #[test]
    fn mollifier_reference_values() {
        assert!((mollifier(0.0) - E_INV).abs() < 1e-15);
        assert_eq!(mollifier(1.0), 0.0);
        assert_eq!(mollifier(-1.0), 0.0);
        assert_eq!(mollifier(3.7), 0.0);
        // e^{-4/3}, 30-digit reference
        assert!((mollifier(-0.5) - 0.263_597_138_115_726_8).abs() < 1e-15);
    }

    #[test]
    fn bump_a_normalization_constant() {
        // c0 = 1 / (2 ∫ l) with ∫ l = 0.443993816168079...
        assert!((bump_a_norm_const() - 1.126_141_810_521_790_5).abs() < 1e-9);
        let mass = quad::integrate_default(bump_a, -2.0, 2.0);
        assert!((mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bump_a_vanishes_at_origin_and_outside() {
        assert_eq!(bump_a(0.0), 0.0);
        assert_eq!(bump_a(2.0), 0.0);
        assert_eq!(bump_a(-2.4), 0.0);
        assert!(bump_a(1.0) > 0.4);
    }

    #[test]
    fn bump_b_reference_values() {
        assert!((bump_b(0.0) - E_INV).abs() < 1e-15);
        // b(-3/4) = -l(4·(-3/4)+3) = -l(0)
        assert!((bump_b(-0.75) + E_INV).abs() < 1e-15);
        assert_eq!(bump_b(1.0), 0.0);
        let integral = quad::integrate_default(bump_b, -1.0, 1.0);
        assert!(integral.abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn building_blocks_are_even(x in -3.0f64..3.0) {
            prop_assert!((mollifier(x) - mollifier(-x)).abs() < 1e-15);
            prop_assert!((bump_a(x) - bump_a(-x)).abs() < 1e-15);
            prop_assert!((bump_b(x) - bump_b(-x)).abs() < 1e-15);
        }
    }

    #[test]
    fn building_blocks_even_on_ten_thousand_points() {
        let mut state = 0x2545F4914F6CDD1Du64;
        for _ in 0..10_000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = 6.0 * ((state >> 33) as f64 / (1u64 << 31) as f64) - 3.0;
            assert!((mollifier(x) - mollifier(-x)).abs() < 1e-15);
            assert!((bump_a(x) - bump_a(-x)).abs() < 1e-15);
            assert!((bump_b(x) - bump_b(-x)).abs() < 1e-15);
        }
    }

    #[test]
    fn density_values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<SmoothDensity>();
        assert_send_sync::<crate::kernels::Kernel>();
    }

    #[test]
    fn gaussian_baseline_reference_values() {
        let d = gaussian_baseline(1.0).unwrap();
        assert!((d.evaluate(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((d.mass() - 1.0).abs() < 1e-8);
        let d2 = gaussian_baseline(2.0).unwrap();
        assert!((d2.evaluate(0.0) - 0.199_471_140_200_716_34).abs() < 1e-15);
        assert!(gaussian_baseline(0.0).is_err());
        assert!(gaussian_baseline(-1.0).is_err());
    }

    #[test]
    fn gaussian_baseline_passes_its_own_claims() {
        let d = gaussian_baseline(1.0).unwrap();
        let check = check_smooth_density(&d);
        assert!(check.pass(), "{check:?}");
    }

    #[test]
    fn seminorm_of_constant_slice_is_zero() {
        let d = SmoothDensity::new("const", 0.5, 1.0, (-1.0, 1.0), |_| 0.5);
        assert_eq!(holder_seminorm_estimate(&d, 0.5, 1e-3), 0.0);
        assert_eq!(holder_seminorm_estimate(&d, 1.0, 1e-3), 0.0);
    }

    #[test]
    fn seminorm_of_gaussian_at_beta_one_matches_derivative_oscillation() {
        // oscillation of φ' is 2 sup|φ'| = 2 φ(1) = 0.48394...
        let d = gaussian_baseline(1.0).unwrap();
        let est = holder_seminorm_estimate(&d, 1.0, 1e-3);
        assert!((est - 0.483_941_449_038_286_7).abs() < 1e-4, "est = {est}");
    }

    #[test]
    fn kink_is_flagged_and_blows_up_at_fractional_beta() {
        let kink = SmoothDensity::new("abs", 1.0, 1.0, (-1.0, 1.0), |x: f64| x.abs());
        // integer beta = 1: derivative oscillation of |x| is 2, exceeding the
        // claimed radius 1, so the density is flagged a non-member
        let est = holder_seminorm_fn(&|x: f64| x.abs(), -1.0, 1.0, 1.0, 1e-3);
        assert!(est > 1.9 && est < 2.1, "est = {est}");
        assert!(est > kink.holder_radius() * HOLDER_SLACK);
        // fractional beta = 1.5: the ratio at the kink grows as the step shrinks
        let coarse = holder_seminorm_fn(&|x: f64| x.abs(), -1.0, 1.0, 1.5, 1e-2);
        let fine = holder_seminorm_fn(&|x: f64| x.abs(), -1.0, 1.0, 1.5, 1e-3);
        assert!(fine > 2.0 * coarse, "coarse = {coarse}, fine = {fine}");
    }

    #[test]
    fn sample_zero_points_is_empty() {
        let d = gaussian_baseline(1.0).unwrap();
        assert!(d.sample(0, 7).unwrap().is_empty());
    }

    #[test]
    fn sample_is_deterministic_given_seed() {
        let d = gaussian_baseline(1.0).unwrap();
        let a = d.sample(64, 123).unwrap();
        let b = d.sample(64, 123).unwrap();
        let c = d.sample(64, 124).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_sample_mean_is_near_zero() {
        let n = 100_000;
        let d = gaussian_baseline(1.0).unwrap();
        let xs = d.sample(n, 42).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "mean = {mean}");
    }

    #[test]
    fn bump_a_sample_respects_support_and_avoids_origin() {
        let n = 100_000;
        let d = SmoothDensity::new("bump-a", 1.0, 3.0, (-2.0, 2.0), bump_a);
        let xs = d.sample(n, 99).unwrap();
        assert!(xs.iter().all(|&x| (-2.0..=2.0).contains(&x)));
        let near_zero = xs.iter().filter(|&&x| x.abs() <= 0.05).count();
        // quadrature mass of a on [-0.05, 0.05] is far below 1e-2
        assert!((near_zero as f64) / (n as f64) <= 0.01);
    }

    #[test]
    fn empirical_cdf_matches_quadrature_cdf() {
        // DKW-style check at n = 1e5: Kolmogorov distance <= 2/sqrt(n)
        let n = 100_000usize;
        let d = gaussian_baseline(1.0).unwrap();
        let mut xs = d.sample(n, 2024).unwrap();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());

        // independent grid CDF oracle: cumulative Simpson on 4096 panels
        let (lo, hi) = d.support();
        let cells = 4096;
        let w = (hi - lo) / cells as f64;
        let mut cdf_knots = vec![0.0f64; cells + 1];
        for i in 0..cells {
            let a = lo + i as f64 * w;
            let m = a + 0.5 * w;
            let b = a + w;
            cdf_knots[i + 1] = cdf_knots[i]
                + w / 6.0 * (d.evaluate(a) + 4.0 * d.evaluate(m) + d.evaluate(b));
        }
        let cdf = |x: f64| -> f64 {
            let t = ((x - lo) / w).clamp(0.0, cells as f64);
            let i = (t as usize).min(cells - 1);
            let frac = t - i as f64;
            cdf_knots[i] + frac * (cdf_knots[i + 1] - cdf_knots[i])
        };

        let mut ks = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let f = cdf(x);
            ks = ks.max((f - i as f64 / n as f64).abs());
            ks = ks.max((f - (i + 1) as f64 / n as f64).abs());
        }
        assert!(ks <= 2.0 / (n as f64).sqrt(), "ks = {ks}");
    }
}
