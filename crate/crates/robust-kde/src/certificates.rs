//! Numerical divergences and executable lower-bound certificates.
//!
//! A `TwoPointCertificate` turns a perturbation pair into a concrete risk
//! lower bound: the chi-squared divergence between the two mixtures is
//! tensorized exactly to the n-sample divergence via `(1+χ²)^n - 1`, and
//! the two-point bound `(1/8) e^{-χ²_joint} Δ²` is evaluated with the
//! pair's separation Δ.

use crate::densities::pairs::{baseline_for, PairConstants, PerturbationPair};
use crate::densities::{
    bump_b, grid_min_fn, holder_seminorm_fn, SmoothDensity, HOLDER_SLACK, HOLDER_STEP,
};
use crate::error::{Error, Result};
use crate::quad;

/// Densities below this are treated as zero when probing for support
/// violations inside divergence integrands.
const SUPPORT_FLOOR: f64 = 1e-300;
/// Mass above this sitting on a zero-density region flags a violation.
const VIOLATION_LEVEL: f64 = 1e-12;

/// A divergence value together with a support-violation flag; a violation
/// means the first density puts mass where the second vanishes, so the
/// chi-squared divergence is `+∞`.
#[derive(Debug, Clone, Copy)]
pub struct DivergenceValue {
    pub value: f64,
    pub support_violation: bool,
}

fn expand_domain(lo: f64, hi: f64) -> (f64, f64) {
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn union_support(p: &SmoothDensity, q: &SmoothDensity) -> (f64, f64) {
    let lo = p.support().0.min(q.support().0);
    let hi = p.support().1.max(q.support().1);
    expand_domain(lo, hi)
}

/// Chi-squared divergence `χ²(P, Q) = ∫ p²/q - 1` over `[lo, hi]`,
/// computed in the cancellation-free form `∫ (p-q)²/q`.
pub fn chi_squared_fn(
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> DivergenceValue {
    let violated = std::cell::Cell::new(false);
    let value = quad::integrate_default(
        |x| {
            let px = p(x);
            let qx = q(x);
            if qx <= SUPPORT_FLOOR {
                if px > VIOLATION_LEVEL {
                    violated.set(true);
                }
                0.0
            } else {
                let d = px - qx;
                d * d / qx
            }
        },
        lo,
        hi,
    );
    if violated.get() {
        DivergenceValue {
            value: f64::INFINITY,
            support_violation: true,
        }
    } else {
        DivergenceValue {
            value: value.max(0.0),
            support_violation: false,
        }
    }
}

/// Chi-squared divergence between two densities over the union of their
/// effective supports, expanded by 10%.
pub fn chi_squared(p: &SmoothDensity, q: &SmoothDensity) -> DivergenceValue {
    let (lo, hi) = union_support(p, q);
    chi_squared_fn(|x| p.evaluate(x), |x| q.evaluate(x), lo, hi)
}

/// Total variation distance `½ ∫ |p - q|` over `[lo, hi]`, clamped to `[0, 1]`.
pub fn total_variation_fn(
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let v = 0.5 * quad::integrate_default(|x| (p(x) - q(x)).abs(), lo, hi);
    v.clamp(0.0, 1.0)
}

/// Total variation distance between two densities over the union of their
/// effective supports.
pub fn total_variation(p: &SmoothDensity, q: &SmoothDensity) -> f64 {
    let (lo, hi) = union_support(p, q);
    total_variation_fn(|x| p.evaluate(x), |x| q.evaluate(x), lo, hi)
}

/// An executable two-point lower bound.
#[derive(Debug, Clone)]
pub struct TwoPointCertificate {
    pub pair: PerturbationPair,
    pub n: usize,
    /// χ² between the two single-observation mixtures.
    pub chi2_single: f64,
    /// Exact n-sample tensorization `(1 + χ²)^n - 1`.
    pub chi2_joint: f64,
    /// Separation `|f(0) - f̃(0)|`.
    pub delta: f64,
    /// `(1/8) e^{-χ²_joint} Δ²`.
    pub lecam_bound: f64,
    pub support_violation: bool,
}

impl TwoPointCertificate {
    pub fn constants(&self) -> &PairConstants {
        &self.pair.constants
    }
}

/// Evaluate the two-point bound for `n` observations of the pair's
/// mixtures. An infinite χ² (support violation) yields bound zero.
pub fn le_cam_bound(pair: &PerturbationPair, n: usize) -> TwoPointCertificate {
    let (lo, hi) = {
        let (lo, hi) = pair.mixture_support();
        expand_domain(lo, hi)
    };
    let single = chi_squared_fn(|x| pair.mixture_tilde(x), |x| pair.mixture(x), lo, hi);
    let chi2_single = single.value;
    let chi2_joint = if chi2_single.is_finite() {
        (1.0 + chi2_single).powi(n as i32) - 1.0
    } else {
        f64::INFINITY
    };
    let delta = pair.separation;
    let lecam_bound = if chi2_joint.is_finite() {
        0.125 * (-chi2_joint).exp() * delta * delta
    } else {
        0.0
    };
    TwoPointCertificate {
        pair: pair.clone(),
        n,
        chi2_single,
        chi2_joint,
        delta,
        lecam_bound,
        support_violation: single.support_violation,
    }
}

/// Constrained-risk-inequality bound: if an estimator is `δ`-accurate
/// under the first mixture, its risk under the second is at least
/// `(Δ - δI)²` with `I = (∫ q²/p)^{n/2}`, whenever `δI <= Δ`.
#[derive(Debug, Clone, Copy)]
pub struct ConstrainedRiskBound {
    pub bound: f64,
    pub i_value: f64,
    /// False when `δI > Δ` and the inequality does not apply.
    pub applicable: bool,
    pub support_violation: bool,
}

pub fn constrained_risk_bound(
    pair: &PerturbationPair,
    n: usize,
    delta_small: f64,
) -> ConstrainedRiskBound {
    let (lo, hi) = {
        let (lo, hi) = pair.mixture_support();
        expand_domain(lo, hi)
    };
    let chi2 = chi_squared_fn(|x| pair.mixture_tilde(x), |x| pair.mixture(x), lo, hi);
    let i_value = if chi2.value.is_finite() {
        (1.0 + chi2.value).powf(n as f64 / 2.0)
    } else {
        f64::INFINITY
    };
    let delta = pair.separation;
    if delta_small * i_value <= delta {
        ConstrainedRiskBound {
            bound: (delta - delta_small * i_value).powi(2),
            i_value,
            applicable: true,
            support_violation: chi2.support_violation,
        }
    } else {
        ConstrainedRiskBound {
            bound: 0.0,
            i_value,
            applicable: false,
            support_violation: chi2.support_violation,
        }
    }
}

/// Quadrature check of the density-difference criterion: `d` is a
/// difference of two densities iff `∫d = 0` and `∫|d| <= 2`.
#[derive(Debug, Clone, Copy)]
pub struct DifferenceCheck {
    pub is_difference: bool,
    pub integral: f64,
    pub abs_integral: f64,
}

pub fn is_density_difference(
    d: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> DifferenceCheck {
    let integral = quad::integrate_default(&d, lo, hi);
    let abs_integral = quad::integrate_default(|x| d(x).abs(), lo, hi);
    DifferenceCheck {
        is_difference: integral.abs() <= tol && abs_integral <= 2.0 + tol,
        integral,
        abs_integral,
    }
}

/// Split a density difference into the two densities
/// `d_± + (1 - ½∫|d|) base`; their difference reproduces `d`.
pub fn density_difference_decompose(
    d: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    lo: f64,
    hi: f64,
    base: &SmoothDensity,
) -> Result<(SmoothDensity, SmoothDensity)> {
    let check = is_density_difference(&d, lo, hi, 1e-8);
    if !check.is_difference {
        return Err(Error::InvalidParameter(format!(
            "not a density difference: int d = {}, int |d| = {}",
            check.integral, check.abs_integral
        )));
    }
    let leftover = 1.0 - 0.5 * check.abs_integral;
    let support = (lo.min(base.support().0), hi.max(base.support().1));
    let plus = {
        let d = d.clone();
        let base = base.clone();
        SmoothDensity::new(
            format!("{}+d_plus", base.label()),
            base.beta(),
            f64::INFINITY,
            support,
            move |x| d(x).max(0.0) + leftover * base.evaluate(x),
        )
    };
    let minus = {
        let base = base.clone();
        SmoothDensity::new(
            format!("{}+d_minus", base.label()),
            base.beta(),
            f64::INFINITY,
            support,
            move |x| (-d(x)).max(0.0) + leftover * base.evaluate(x),
        )
    };
    Ok((plus, minus))
}

/// Search configuration for the modulus-of-continuity estimate.
#[derive(Debug, Clone)]
pub struct ModulusSearch {
    /// Golden-section iterations over the bandwidth.
    pub iterations: usize,
    /// Bisection steps used to refine the feasible amplitude.
    pub amplitude_bisections: usize,
    /// Coarse profile points recorded for unimodality diagnostics.
    pub profile_points: usize,
}

impl Default for ModulusSearch {
    fn default() -> Self {
        Self {
            iterations: 60,
            amplitude_bisections: 30,
            profile_points: 17,
        }
    }
}

/// Lower estimate of the modulus of continuity at `epsilon`, with the
/// maximizing bandwidth and amplitude and the search profile.
#[derive(Debug, Clone)]
pub struct ModulusReport {
    /// Largest feasible squared separation `|f(0) - f̃(0)|²`.
    pub estimate: f64,
    pub h_star: f64,
    pub amplitude: f64,
    /// `(h, squared separation)` pairs seen during the search.
    pub profile: Vec<(f64, f64)>,
}

/// Estimate the modulus of continuity `ω(ε)` from below by maximizing the
/// squared separation of the one-parameter family `f̃ = f0 + c h^{β0} b(x/h)`
/// subject to `TV(f0, f̃) <= ε/(1-ε)` and Hölder-class feasibility, via
/// golden-section search over `h ∈ [ε², 1]`.
pub fn modulus_of_continuity(
    beta0: f64,
    l0: f64,
    epsilon: f64,
    search: &ModulusSearch,
) -> Result<ModulusReport> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2], got {epsilon}"
        )));
    }
    let (f0, _) = baseline_for(beta0, l0)?;
    let tv_budget = epsilon / (1.0 - epsilon);
    let int_abs_b = quad::integrate_default(|x| bump_b(x).abs(), -1.0, 1.0);
    let (f_lo, f_hi) = f0.support();

    // precomputed oscillation range of the baseline's derivative, so each
    // candidate only has to scan the perturbed region
    let k = beta0.floor() as usize;
    let fractional = beta0 - k as f64 > 0.0;
    let base_range = if fractional {
        None
    } else {
        Some(derivative_range(&|x| f0.evaluate(x), f_lo, f_hi, k, HOLDER_STEP))
    };

    let feasible = |c: f64, h: f64| -> bool {
        let f0 = &f0;
        let perturbed = move |x: f64| f0.evaluate(x) + c * h.powf(beta0) * bump_b(x / h);
        let bump_lo = (-1.4 * h).max(f_lo);
        let bump_hi = (1.4 * h).min(f_hi);
        if grid_min_fn(&perturbed, bump_lo, bump_hi, 2001) < -1e-12 {
            return false;
        }
        // the finite-difference probes must resolve the bump scale, so
        // both the step and the probe window track h
        let step = (h / 64.0).min(HOLDER_STEP);
        let sem = if let Some((base_min, base_max)) = base_range {
            let (lo_v, hi_v) = derivative_range(&perturbed, bump_lo, bump_hi, k, step);
            base_max.max(hi_v) - base_min.min(lo_v)
        } else {
            let near = holder_seminorm_fn(&perturbed, bump_lo, bump_hi, beta0, step);
            let far = holder_seminorm_fn(&perturbed, f_lo, f_hi, beta0, HOLDER_STEP);
            near.max(far)
        };
        sem <= l0 * HOLDER_SLACK
    };

    // largest feasible amplitude at h: start from the TV cap and refine
    let amplitude_at = |h: f64| -> f64 {
        let c_tv = 2.0 * tv_budget / (h.powf(beta0 + 1.0) * int_abs_b);
        if feasible(c_tv, h) {
            return c_tv;
        }
        let mut lo = 0.0;
        let mut hi = c_tv;
        for _ in 0..search.amplitude_bisections {
            let mid = 0.5 * (lo + hi);
            if feasible(mid, h) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let objective = |h: f64| -> (f64, f64) {
        let c = amplitude_at(h);
        let separation = c * h.powf(beta0) * bump_b(0.0);
        (separation * separation, c)
    };

    let log_lo = (epsilon * epsilon).ln();
    let log_hi = 0.0f64;
    let mut profile = Vec::new();
    let mut best = (0.0f64, (epsilon * epsilon).sqrt(), 0.0f64); // (sep², h, c)
    for i in 0..search.profile_points {
        let t = i as f64 / (search.profile_points - 1) as f64;
        let h = (log_lo + t * (log_hi - log_lo)).exp();
        let (sq, c) = objective(h);
        profile.push((h, sq));
        if sq > best.0 {
            best = (sq, h, c);
        }
    }

    // golden-section on log h
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = log_lo;
    let mut b = log_hi;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1.exp());
    let mut f2 = objective(x2.exp());
    for _ in 0..search.iterations {
        profile.push((x1.exp(), f1.0));
        profile.push((x2.exp(), f2.0));
        if f1.0 > best.0 {
            best = (f1.0, x1.exp(), f1.1);
        }
        if f2.0 > best.0 {
            best = (f2.0, x2.exp(), f2.1);
        }
        if f1.0 < f2.0 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2.exp());
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1.exp());
        }
    }
    profile.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

    Ok(ModulusReport {
        estimate: best.0,
        h_star: best.1,
        amplitude: best.2,
        profile,
    })
}

/// Min and max of the order-`k` central-difference derivative over a grid.
fn derivative_range(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, k: usize, step: f64) -> (f64, f64) {
    let span = hi - lo;
    let spacing = step.max(span / 8000.0);
    let points = (span / spacing).ceil() as usize + 1;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for i in 0..points {
        let x = lo + span * i as f64 / (points - 1) as f64;
        let v = central_diff(f, x, k, step);
        min = min.min(v);
        max = max.max(v);
    }
    (min, max)
}

fn central_diff(f: &dyn Fn(f64) -> f64, x: f64, k: usize, step: f64) -> f64 {
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
