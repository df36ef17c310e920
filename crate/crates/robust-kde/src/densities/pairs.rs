//! Two-point perturbation pairs: pairs of contaminated models that are
//! statistically indistinguishable (identical or nearly identical
//! mixtures) yet have separated target values at the origin.
//!
//! Each construction returns the four densities together with the tuning
//! constants that were found by bisection. "Sufficiently small" constants
//! are resolved numerically: start at 1 and halve until the nonnegativity
//! grid check and the Hölder seminorm check both pass.

use super::{
    bump_a, bump_b, gaussian_baseline, grid_min_fn, holder_seminorm_fn, mollifier, SmoothDensity,
    HOLDER_SLACK, HOLDER_STEP, VERIFICATION_GRID,
};
use crate::error::{Error, Result};
use crate::quad;

/// Tuning constants chosen by the constructions; `NAN` marks fields a
/// given construction does not use.
#[derive(Debug, Clone, Copy)]
pub struct PairConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub h: f64,
    pub h_tilde: f64,
    pub baseline_scale: f64,
}

impl PairConstants {
    fn empty() -> Self {
        Self {
            c1: f64::NAN,
            c2: f64::NAN,
            c3: f64::NAN,
            c4: f64::NAN,
            h: f64::NAN,
            h_tilde: f64::NAN,
            baseline_scale: f64::NAN,
        }
    }
}

/// A constructed pair of contaminated models `(f, g, ε)` and
/// `(f̃, g̃, ε̃)` with separation `|f(0) - f̃(0)|`.
#[derive(Debug, Clone)]
pub struct PerturbationPair {
    pub f: SmoothDensity,
    pub f_tilde: SmoothDensity,
    pub g: SmoothDensity,
    pub g_tilde: SmoothDensity,
    pub epsilon: f64,
    pub epsilon_tilde: f64,
    /// Contamination level bound at the origin (`+∞` when unconstrained).
    pub m: f64,
    pub separation: f64,
    pub constants: PairConstants,
}

impl PerturbationPair {
    /// First mixture `(1-ε) f + ε g`.
    pub fn mixture(&self, x: f64) -> f64 {
        (1.0 - self.epsilon) * self.f.evaluate(x) + self.epsilon * self.g.evaluate(x)
    }

    /// Second mixture `(1-ε̃) f̃ + ε̃ g̃`.
    pub fn mixture_tilde(&self, x: f64) -> f64 {
        (1.0 - self.epsilon_tilde) * self.f_tilde.evaluate(x)
            + self.epsilon_tilde * self.g_tilde.evaluate(x)
    }

    /// Union of all four member supports.
    pub fn mixture_support(&self) -> (f64, f64) {
        let members = [&self.f, &self.f_tilde, &self.g, &self.g_tilde];
        let lo = members.iter().map(|d| d.support().0).fold(f64::INFINITY, f64::min);
        let hi = members.iter().map(|d| d.support().1).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Max of `|mixture - mixture_tilde|` over a uniform grid.
    pub fn max_mixture_discrepancy(&self, points: usize) -> f64 {
        let (lo, hi) = self.mixture_support();
        let mut worst = 0.0f64;
        for i in 0..points {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            worst = worst.max((self.mixture(x) - self.mixture_tilde(x)).abs());
        }
        worst
    }

    pub fn members(&self) -> [&SmoothDensity; 4] {
        [&self.f, &self.f_tilde, &self.g, &self.g_tilde]
    }
}

/// Halve from 1 until `feasible` accepts; report the first passing value.
fn bisect_unit(mut feasible: impl FnMut(f64) -> bool, what: &str) -> Result<f64> {
    let mut c = 1.0;
    for _ in 0..60 {
        if feasible(c) {
            return Ok(c);
        }
        c *= 0.5;
    }
    Err(Error::Infeasible(format!(
        "constant for {what} collapsed below 2^-60"
    )))
}

fn nonneg_on(eval: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> bool {
    grid_min_fn(eval, lo, hi, VERIFICATION_GRID) >= -1e-12
}

fn seminorm_ok(eval: &dyn Fn(f64) -> f64, lo: f64, hi: f64, beta: f64, radius: f64) -> bool {
    holder_seminorm_fn(eval, lo, hi, beta, HOLDER_STEP) <= radius * HOLDER_SLACK
}

fn validate_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "contamination proportion must lie in (0, 1/2], got {epsilon}"
        )));
    }
    Ok(())
}

/// Mean-zero Gaussian baseline: the smallest scale in `{1, 2, 4, ...}`
/// whose numeric Hölder seminorm at `beta0` fits inside `l0 / 2`.
pub(crate) fn baseline_for(beta0: f64, l0: f64) -> Result<(SmoothDensity, f64)> {
    let mut scale = 1.0;
    for _ in 0..11 {
        let candidate = gaussian_baseline(scale)?;
        let (lo, hi) = candidate.support();
        let sem = holder_seminorm_fn(&|x| candidate.evaluate(x), lo, hi, beta0, HOLDER_STEP);
        if sem <= (l0 / 2.0) * HOLDER_SLACK {
            let density = SmoothDensity::new(
                format!("baseline(scale={scale})"),
                beta0,
                l0 / 2.0,
                (lo, hi),
                move |x| candidate.evaluate(x),
            );
            return Ok((density, scale));
        }
        scale *= 2.0;
    }
    Err(Error::Infeasible(format!(
        "no Gaussian baseline up to scale 1024 fits the ({beta0}, {l0}/2) class"
    )))
}

/// Pair realizing the contamination-level floor: the mixtures are
/// identical while `f` and `f̃` differ by `c1 (ε/(1-ε)) (m∧1) b(x)`, so
/// the separation scales like `ε (m∧1)`.
pub fn pair_level(
    epsilon: f64,
    m: f64,
    beta0: f64,
    beta1: f64,
    l0: f64,
    l1: f64,
) -> Result<PerturbationPair> {
    validate_epsilon(epsilon)?;
    if m < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "contamination level must be nonnegative, got {m}"
        )));
    }
    let level = m.min(1.0);
    let (f0, baseline_scale) = baseline_for(beta0, l0)?;
    let (f_lo, f_hi) = f0.support();

    let c2 = bisect_unit(
        |c| {
            let eval = move |x: f64| c * bump_a(c * x);
            let sup = 2.0 / c;
            seminorm_ok(&eval, -sup, sup, beta1, l1 / 2.0)
        },
        "pair_level c2 (scaled bump-a contamination)",
    )?;
    let g_sup = 2.0 / c2;

    let eps_ratio = epsilon / (1.0 - epsilon);
    let f0_for_check = f0.clone();
    let c1 = bisect_unit(
        |c| {
            let f0 = f0_for_check.clone();
            let f_tilde = move |x: f64| f0.evaluate(x) + c * eps_ratio * level * bump_b(x);
            let g = move |x: f64| c2 * bump_a(c2 * x) + c * level * bump_b(x);
            c * level * mollifier(0.0) <= m + 1e-10
                && nonneg_on(&f_tilde, f_lo, f_hi)
                && seminorm_ok(&f_tilde, f_lo, f_hi, beta0, l0)
                && nonneg_on(&g, -g_sup, g_sup)
                && seminorm_ok(&g, -g_sup, g_sup, beta1, l1)
        },
        "pair_level c1 (bump-b amplitude)",
    )?;

    let f = SmoothDensity::new("level:f", beta0, l0 / 2.0, (f_lo, f_hi), {
        let f0 = f0.clone();
        move |x| f0.evaluate(x)
    });
    let f_tilde = SmoothDensity::new("level:f~", beta0, l0, (f_lo, f_hi), {
        let f0 = f0.clone();
        move |x| f0.evaluate(x) + c1 * eps_ratio * level * bump_b(x)
    });
    let g = SmoothDensity::new("level:g", beta1, l1, (-g_sup, g_sup), move |x| {
        c2 * bump_a(c2 * x) + c1 * level * bump_b(x)
    });
    let g_tilde = SmoothDensity::new("level:g~", beta1, l1 / 2.0, (-g_sup, g_sup), move |x| {
        c2 * bump_a(c2 * x)
    });

    let separation = (f.evaluate(0.0) - f_tilde.evaluate(0.0)).abs();
    Ok(PerturbationPair {
        f,
        f_tilde,
        g,
        g_tilde,
        epsilon,
        epsilon_tilde: epsilon,
        m,
        separation,
        constants: PairConstants {
            c1,
            c2,
            baseline_scale,
            ..PairConstants::empty()
        },
    })
}

/// Pair realizing the neighborhood term: a two-level perturbation with
/// bandwidths `h` and `h̃` linked by `c2 h^{β0} l(0) = c3 h̃^{β1} b(0)`,
/// giving contamination level exactly zero on both sides while the
/// mixtures differ only by `-c3 ε h̃^{β1} b(x/h̃)`.
pub fn pair_neighborhood(
    epsilon: f64,
    n: usize,
    beta0: f64,
    beta1: f64,
    l0: f64,
    l1: f64,
) -> Result<PerturbationPair> {
    validate_epsilon(epsilon)?;
    if beta1 > beta0 {
        return Err(Error::InvalidParameter(format!(
            "neighborhood pair requires beta1 <= beta0, got beta1 = {beta1} > beta0 = {beta0}"
        )));
    }
    let n_eps_sq = n as f64 * epsilon * epsilon;
    if n_eps_sq < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "neighborhood pair requires n * epsilon^2 >= 1, got {n_eps_sq}"
        )));
    }

    let h_tilde = n_eps_sq.powf(-1.0 / (2.0 * beta1 + 1.0));
    let (f0, baseline_scale) = baseline_for(beta0, l0)?;

    let c1 = bisect_unit(
        |c| {
            let eval = move |x: f64| c * bump_a(c * x);
            let sup = 2.0 / c;
            seminorm_ok(&eval, -sup, sup, beta1, l1 / 2.0)
        },
        "pair_neighborhood c1 (scaled bump-a contamination)",
    )?;
    // center the negative side lobes on the peak of the scaled bump-a, so
    // they sit where the contamination density has its largest floor
    let c4 = 1.0 / c1;

    // side lobes must stay clear of both the origin and the b-dip region
    let h = h_tilde
        .powf(beta1 / beta0)
        .min(0.9 * (2.0 * c4 - h_tilde))
        .min(1.0);
    if h < h_tilde / 2.0 {
        return Err(Error::Infeasible(format!(
            "bandwidth geometry failed: h = {h} below h_tilde/2 = {}",
            h_tilde / 2.0
        )));
    }

    let g_sup = (2.0 / c1).max(c4 + h).max(1.0);
    let (f_lo, f_hi) = f0.support();
    let f_sup_hi = f_hi.max(c4 + h);
    let eps_ratio = epsilon / (1.0 - epsilon);

    let perturb = move |x: f64, c2: f64| {
        c2 * h.powf(beta0)
            * (mollifier(x / h)
                - mollifier(2.0 * (x - c4) / h)
                - mollifier(2.0 * (x + c4) / h))
    };
    let c3_of = move |c2: f64| c2 * h.powf(beta0) * mollifier(0.0) / (h_tilde.powf(beta1) * bump_b(0.0));

    let f0_for_check = f0.clone();
    let c2 = bisect_unit(
        |c| {
            let f0 = f0_for_check.clone();
            let c3 = c3_of(c);
            let f_tilde = move |x: f64| f0.evaluate(x) + eps_ratio * perturb(x, c);
            let g = move |x: f64| {
                c1 * bump_a(c1 * x) + perturb(x, c) - c3 * h_tilde.powf(beta1) * bump_b(x / h_tilde)
            };
            nonneg_on(&f_tilde, -f_sup_hi, f_sup_hi)
                && seminorm_ok(&f_tilde, -f_sup_hi, f_sup_hi, beta0, l0)
                && nonneg_on(&g, -g_sup, g_sup)
                && seminorm_ok(&g, -g_sup, g_sup, beta1, l1)
        },
        "pair_neighborhood c2 (two-level perturbation amplitude)",
    )?;
    let c3 = c3_of(c2);

    let f = SmoothDensity::new("neighborhood:f", beta0, l0 / 2.0, (f_lo, f_hi), {
        let f0 = f0.clone();
        move |x| f0.evaluate(x)
    });
    let f_tilde = SmoothDensity::new(
        "neighborhood:f~",
        beta0,
        l0,
        (-f_sup_hi, f_sup_hi),
        {
            let f0 = f0.clone();
            move |x| f0.evaluate(x) + eps_ratio * perturb(x, c2)
        },
    );
    let g = SmoothDensity::new("neighborhood:g", beta1, l1, (-g_sup, g_sup), move |x| {
        c1 * bump_a(c1 * x) + perturb(x, c2) - c3 * h_tilde.powf(beta1) * bump_b(x / h_tilde)
    });
    let g_tilde = SmoothDensity::new(
        "neighborhood:g~",
        beta1,
        l1 / 2.0,
        (-g_sup, g_sup),
        move |x| c1 * bump_a(c1 * x),
    );

    let separation = (f.evaluate(0.0) - f_tilde.evaluate(0.0)).abs();
    Ok(PerturbationPair {
        f,
        f_tilde,
        g,
        g_tilde,
        epsilon,
        epsilon_tilde: epsilon,
        m: 0.0,
        separation,
        constants: PairConstants {
            c1,
            c2,
            c3,
            c4,
            h,
            h_tilde,
            baseline_scale,
        },
    })
}

/// Pair realizing the cost of an unknown contamination proportion: the
/// same mixture written with proportions `ε` and `ε̃`.
pub fn pair_proportion(
    epsilon: f64,
    epsilon_tilde: f64,
    beta0: f64,
    beta1: f64,
    l0: f64,
    l1: f64,
) -> Result<PerturbationPair> {
    validate_epsilon(epsilon)?;
    if !(0.0..=epsilon).contains(&epsilon_tilde) {
        return Err(Error::InvalidParameter(format!(
            "require 0 <= epsilon_tilde <= epsilon, got {epsilon_tilde} vs {epsilon}"
        )));
    }
    let (f0, baseline_scale) = baseline_for(beta0, l0)?;
    let (f_lo, f_hi) = f0.support();

    // scaled bump-a must live in both smoothness classes at half radius
    let c1 = bisect_unit(
        |c| {
            let eval = move |x: f64| c * bump_a(c * x);
            let sup = 2.0 / c;
            seminorm_ok(&eval, -sup, sup, beta0, l0 / 2.0)
                && seminorm_ok(&eval, -sup, sup, beta1, l1 / 2.0)
        },
        "pair_proportion c1 (scaled bump-a)",
    )?;
    let g_sup = 2.0 / c1;
    let lo = f_lo.min(-g_sup);
    let hi = f_hi.max(g_sup);

    let weight = (1.0 - epsilon) / (1.0 - epsilon_tilde);
    let f = SmoothDensity::new("proportion:f", beta0, l0 / 2.0, (f_lo, f_hi), {
        let f0 = f0.clone();
        move |x| f0.evaluate(x)
    });
    let f_tilde = SmoothDensity::new("proportion:f~", beta0, l0, (lo, hi), {
        let f0 = f0.clone();
        move |x| weight * f0.evaluate(x) + (1.0 - weight) * c1 * bump_a(c1 * x)
    });
    let g = SmoothDensity::new("proportion:g", beta1, l1 / 2.0, (-g_sup, g_sup), move |x| {
        c1 * bump_a(c1 * x)
    });
    let g_tilde = g.clone();

    let separation = (f.evaluate(0.0) - f_tilde.evaluate(0.0)).abs();
    Ok(PerturbationPair {
        f,
        f_tilde,
        g,
        g_tilde,
        epsilon,
        epsilon_tilde,
        m: 0.0,
        separation,
        constants: PairConstants {
            c1,
            baseline_scale,
            ..PairConstants::empty()
        },
    })
}

/// Pair for arbitrary (Huber) contamination: `f̃ = f0 + c h^{β0} b(x/h)`
/// with the largest dyadic `h` for which the scaled difference passes the
/// density-difference criterion, and explicit `g, g̃` built from the
/// positive/negative parts of that difference.
pub fn pair_arbitrary(epsilon: f64, beta0: f64, l0: f64) -> Result<PerturbationPair> {
    validate_epsilon(epsilon)?;
    let (f0, baseline_scale) = baseline_for(beta0, l0)?;
    let (f_lo, f_hi) = f0.support();
    let int_abs_b = quad::integrate_default(|x| bump_b(x).abs(), -1.0, 1.0);
    let ratio = (1.0 - epsilon) / epsilon;

    let f0_for_check = f0.clone();
    let mut chosen: Option<(f64, f64)> = None;
    let mut c = bisect_unit(
        |c| {
            let f0 = f0_for_check.clone();
            let f_tilde = move |x: f64| f0.evaluate(x) + c * bump_b(x);
            nonneg_on(&f_tilde, f_lo, f_hi) && seminorm_ok(&f_tilde, f_lo, f_hi, beta0, l0)
        },
        "pair_arbitrary c (bump amplitude at h = 1)",
    )?;
    for _ in 0..60 {
        // largest dyadic h with c ((1-ε)/ε) h^{β0+1} ∫|b| <= 2
        let h_max = (2.0 / (c * ratio * int_abs_b)).powf(1.0 / (beta0 + 1.0));
        let h = if h_max >= 1.0 {
            1.0
        } else {
            0.5f64.powi((-h_max.log2()).ceil() as i32)
        };
        let f0 = f0.clone();
        let f_tilde = move |x: f64| f0.evaluate(x) + c * h.powf(beta0) * bump_b(x / h);
        if nonneg_on(&f_tilde, f_lo, f_hi) && seminorm_ok(&f_tilde, f_lo, f_hi, beta0, l0) {
            chosen = Some((c, h));
            break;
        }
        c *= 0.5;
    }
    let (c, h) = chosen.ok_or_else(|| {
        Error::Infeasible("pair_arbitrary amplitude collapsed below 2^-60".into())
    })?;

    let abs_d_mass = c * ratio * h.powf(beta0 + 1.0) * int_abs_b;
    let leftover = 1.0 - 0.5 * abs_d_mass;
    let d = move |x: f64| c * ratio * h.powf(beta0) * bump_b(x / h);

    let g_eval = {
        let f0 = f0.clone();
        move |x: f64| d(x).max(0.0) + leftover * f0.evaluate(x)
    };
    let g_tilde_eval = {
        let f0 = f0.clone();
        move |x: f64| (-d(x)).max(0.0) + leftover * f0.evaluate(x)
    };
    let g_radius = holder_seminorm_fn(&g_eval, f_lo, f_hi, beta0, HOLDER_STEP) * 1.05;
    let g_tilde_radius = holder_seminorm_fn(&g_tilde_eval, f_lo, f_hi, beta0, HOLDER_STEP) * 1.05;

    let f = SmoothDensity::new("arbitrary:f", beta0, l0 / 2.0, (f_lo, f_hi), {
        let f0 = f0.clone();
        move |x| f0.evaluate(x)
    });
    let f_tilde = SmoothDensity::new("arbitrary:f~", beta0, l0, (f_lo, f_hi), {
        let f0 = f0.clone();
        move |x| f0.evaluate(x) + c * h.powf(beta0) * bump_b(x / h)
    });
    let g = SmoothDensity::new("arbitrary:g", beta0, g_radius, (f_lo, f_hi), g_eval);
    let g_tilde = SmoothDensity::new(
        "arbitrary:g~",
        beta0,
        g_tilde_radius,
        (f_lo, f_hi),
        g_tilde_eval,
    );

    let separation = (f.evaluate(0.0) - f_tilde.evaluate(0.0)).abs();
    Ok(PerturbationPair {
        f,
        f_tilde,
        g,
        g_tilde,
        epsilon,
        epsilon_tilde: epsilon,
        m: f64::INFINITY,
        separation,
        constants: PairConstants {
            c1: c,
            h,
            baseline_scale,
            ..PairConstants::empty()
        },
    })
}

/// Pair showing joint unidentifiability of `(ε, β0)`: a contaminated
/// model that is also an uncontaminated model of a different class. The
/// separation is `ε |f(0) - g(0)| ≳ ε^{β̃0/(β̃0+1)}`.
pub fn pair_unidentifiable(
    epsilon: f64,
    beta0_tilde: f64,
    l0: f64,
) -> Result<PerturbationPair> {
    validate_epsilon(epsilon)?;
    if beta0_tilde <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta0_tilde must be positive, got {beta0_tilde}"
        )));
    }
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let eps_pow = epsilon.powf(1.0 / (beta0_tilde + 1.0));

    let c3 = bisect_unit(
        |c| {
            let eval = move |x: f64| c * phi(c * x);
            let sup = 9.0 / c;
            seminorm_ok(&eval, -sup, sup, beta0_tilde, l0 / 2.0)
        },
        "pair_unidentifiable c3 (wide component)",
    )?;
    let c4 = bisect_unit(
        |c| {
            // scaled contamination term ε g must live in Σ(β̃0, L0/2)
            let amp = c * epsilon.powf(beta0_tilde / (beta0_tilde + 1.0));
            let eval = move |x: f64| amp * phi(c * x / eps_pow);
            let sup = 9.0 * eps_pow / c;
            seminorm_ok(&eval, -sup, sup, beta0_tilde, l0 / 2.0)
        },
        "pair_unidentifiable c4 (narrow component)",
    )?;

    let f_sup = 9.0 / c3;
    let g_sup = 9.0 * eps_pow / c4;
    let union = f_sup.max(g_sup).max(9.0);

    let f = SmoothDensity::new(
        "unidentifiable:f",
        beta0_tilde,
        l0 / 2.0,
        (-f_sup, f_sup),
        move |x| c3 * phi(c3 * x),
    );
    let g = {
        let eval = move |x: f64| c4 / eps_pow * phi(c4 * x / eps_pow);
        let radius =
            holder_seminorm_fn(&eval, -g_sup, g_sup, beta0_tilde, HOLDER_STEP) * 1.05;
        SmoothDensity::new("unidentifiable:g", beta0_tilde, radius, (-g_sup, g_sup), eval)
    };
    let f_tilde = SmoothDensity::new(
        "unidentifiable:f~",
        beta0_tilde,
        l0,
        (-union, union),
        {
            let f = f.clone();
            let g = g.clone();
            move |x| (1.0 - epsilon) * f.evaluate(x) + epsilon * g.evaluate(x)
        },
    );
    let g_tilde = {
        let radius = holder_seminorm_fn(&|x| phi(x), -9.0, 9.0, beta0_tilde, HOLDER_STEP) * 1.05;
        SmoothDensity::new("unidentifiable:g~", beta0_tilde, radius, (-9.0, 9.0), phi)
    };

    let separation = epsilon * (f.evaluate(0.0) - g.evaluate(0.0)).abs();
    Ok(PerturbationPair {
        f,
        f_tilde,
        g,
        g_tilde,
        epsilon,
        epsilon_tilde: 0.0,
        m: f64::INFINITY,
        separation,
        constants: PairConstants {
            c3,
            c4,
            ..PairConstants::empty()
        },
    })
}
