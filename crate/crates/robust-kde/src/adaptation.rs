//! Data-driven bandwidth selection on a dyadic grid: Lepski's method,
//! its epsilon-reference variant, and the reverse (bias-reference)
//! variants.
//!
//! The forward rules pick the largest bandwidth below which estimates at
//! all smaller grid bandwidths stay within a variance-scale threshold;
//! the reverse rules pick the smallest bandwidth whose estimate stays
//! within a bias-scale threshold of all larger grid bandwidths. All
//! quantifiers are inclusive, so the defining set always contains one
//! trivially passing element; the empty-set fallback conventions are kept
//! anyway.

use crate::error::{Error, Result};
use crate::estimators::{kde_at_zero, Normalization};
use crate::kernels::Kernel;

/// Selector variant, as exposed by the demo CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LepskiVariant {
    Standard,
    EpsilonReference(f64),
    Reverse(f64),
    ReverseConservative(f64),
}

/// Grid, threshold constant and normalization shared by all selectors.
#[derive(Debug, Clone)]
pub struct LepskiConfig {
    /// Descending dyadic bandwidths `{1, 1/2, ..., 2^-m}`.
    pub grid: Vec<f64>,
    pub c1: f64,
    pub norm: Normalization,
}

impl LepskiConfig {
    pub fn for_sample_size(n: usize, c1: f64, norm: Normalization) -> Self {
        Self {
            grid: dyadic_grid(n),
            c1,
            norm,
        }
    }

    /// Default threshold constant `4 √(‖K‖∞ ∫K²)`.
    pub fn default_c1(kernel: &Kernel) -> f64 {
        4.0 * (kernel.sup_norm_bound() * kernel.l2_bound()).sqrt()
    }
}

/// Dyadic grid `{1, 1/2, ..., 2^-m}` with `2^-m <= 1/n < 2^-(m-1)`.
pub fn dyadic_grid(n: usize) -> Vec<f64> {
    assert!(n >= 1, "sample size must be positive");
    let mut m = 0u32;
    while (1u128 << m) < n as u128 {
        m += 1;
    }
    (0..=m).map(|j| 0.5f64.powi(j as i32)).collect()
}

/// One pairwise comparison of the defining set.
#[derive(Debug, Clone, Copy)]
pub struct PairTest {
    pub h: f64,
    pub l: f64,
    pub difference: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Outcome of a selector run: the chosen bandwidth, the estimate at it,
/// the per-bandwidth estimates, and the full test matrix.
#[derive(Debug, Clone)]
pub struct LepskiSelection {
    pub h_hat: f64,
    pub estimate: f64,
    pub estimates: Vec<(f64, f64)>,
    pub tests: Vec<PairTest>,
    /// True when the defining set was empty and the fallback convention
    /// supplied the bandwidth.
    pub from_empty_set: bool,
}

fn estimates_on_grid(
    points: &[f64],
    kernel: &Kernel,
    cfg: &LepskiConfig,
) -> Result<Vec<(f64, f64)>> {
    if cfg.grid.is_empty() {
        return Err(Error::InvalidParameter("empty bandwidth grid".into()));
    }
    if cfg.c1.is_nan() || cfg.c1 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "c1 must be nonnegative, got {}",
            cfg.c1
        )));
    }
    cfg.grid
        .iter()
        .map(|&h| Ok((h, kde_at_zero(points, kernel, h, cfg.norm)?)))
        .collect()
}

/// Shared forward-rule engine: largest `h` with
/// `|f̂_h - f̂_l| <= threshold(l)` for every grid `l <= h`.
fn select_forward(
    points: &[f64],
    kernel: &Kernel,
    cfg: &LepskiConfig,
    threshold: impl Fn(f64) -> f64,
) -> Result<LepskiSelection> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "forward Lepski rules need n >= 2".into(),
        ));
    }
    let estimates = estimates_on_grid(points, kernel, cfg)?;
    let mut tests = Vec::new();
    let mut h_hat: Option<(f64, f64)> = None;
    for &(h, est_h) in &estimates {
        let mut ok = true;
        for &(l, est_l) in &estimates {
            if l > h {
                continue;
            }
            let difference = (est_h - est_l).abs();
            let bound = threshold(l);
            let pass = difference <= bound;
            tests.push(PairTest {
                h,
                l,
                difference,
                threshold: bound,
                pass,
            });
            ok &= pass;
        }
        if ok && h_hat.is_none_or(|(best, _)| h > best) {
            h_hat = Some((h, est_h));
        }
    }
    match h_hat {
        Some((h, est)) => Ok(LepskiSelection {
            h_hat: h,
            estimate: est,
            estimates,
            tests,
            from_empty_set: false,
        }),
        None => {
            let fallback = 1.0 / n as f64;
            let estimate = kde_at_zero(points, kernel, fallback, cfg.norm)?;
            Ok(LepskiSelection {
                h_hat: fallback,
                estimate,
                estimates,
                tests,
                from_empty_set: true,
            })
        }
    }
}

/// Shared reverse-rule engine: smallest `h` with
/// `|f̂_h - f̂_l| <= c1 l^beta` for every grid `l >= h`.
fn select_reverse(
    points: &[f64],
    kernel: &Kernel,
    cfg: &LepskiConfig,
    beta: f64,
) -> Result<LepskiSelection> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    let estimates = estimates_on_grid(points, kernel, cfg)?;
    let mut tests = Vec::new();
    let mut h_hat: Option<(f64, f64)> = None;
    for &(h, est_h) in &estimates {
        let mut ok = true;
        for &(l, est_l) in &estimates {
            if l < h {
                continue;
            }
            let difference = (est_h - est_l).abs();
            let bound = cfg.c1 * l.powf(beta);
            let pass = difference <= bound;
            tests.push(PairTest {
                h,
                l,
                difference,
                threshold: bound,
                pass,
            });
            ok &= pass;
        }
        if ok && h_hat.is_none_or(|(best, _)| h < best) {
            h_hat = Some((h, est_h));
        }
    }
    match h_hat {
        Some((h, est)) => Ok(LepskiSelection {
            h_hat: h,
            estimate: est,
            estimates,
            tests,
            from_empty_set: false,
        }),
        None => {
            let estimate = kde_at_zero(points, kernel, 1.0, cfg.norm)?;
            Ok(LepskiSelection {
                h_hat: 1.0,
                estimate,
                estimates,
                tests,
                from_empty_set: true,
            })
        }
    }
}

/// Standard Lepski rule with threshold `c1 √(log n / (n l))`.
pub fn lepski_standard(
    points: &[f64],
    kernel: &Kernel,
    cfg: &LepskiConfig,
) -> Result<LepskiSelection> {
    let n = points.len() as f64;
    let c1 = cfg.c1;
    select_forward(points, kernel, cfg, move |l| c1 * (n.ln() / (n * l)).sqrt())
}

/// Epsilon-reference rule with threshold `c1 (√(log n / (n l)) + ε/l)`;
/// used with the plain `1/n` normalization.
pub fn lepski_epsilon_reference(
    points: &[f64],
    kernel: &Kernel,
    epsilon: f64,
    cfg: &LepskiConfig,
) -> Result<LepskiSelection> {
    if epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon reference must be nonnegative, got {epsilon}"
        )));
    }
    if cfg.norm != Normalization::Plain {
        return Err(Error::InvalidParameter(
            "epsilon-reference rule uses the plain 1/n normalization".into(),
        ));
    }
    let n = points.len() as f64;
    let c1 = cfg.c1;
    select_forward(points, kernel, cfg, move |l| {
        c1 * ((n.ln() / (n * l)).sqrt() + epsilon / l)
    })
}

/// Reverse rule with bias-scale threshold `c1 l^{β0}`.
pub fn lepski_reverse(
    points: &[f64],
    kernel: &Kernel,
    beta0: f64,
    cfg: &LepskiConfig,
) -> Result<LepskiSelection> {
    select_reverse(points, kernel, cfg, beta0)
}

/// Reverse rule run with a conservative lower bound `β̃0 <= β0`; yields
/// consistency without knowledge of either `ε` or `β0`.
pub fn lepski_reverse_conservative(
    points: &[f64],
    kernel: &Kernel,
    beta0_lower: f64,
    cfg: &LepskiConfig,
) -> Result<LepskiSelection> {
    if beta0_lower <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "conservative smoothness bound must be positive, got {beta0_lower}"
        )));
    }
    select_reverse(points, kernel, cfg, beta0_lower)
}

/// Dispatch on the variant; used by the demo CLI.
pub fn select_bandwidth(
    points: &[f64],
    kernel: &Kernel,
    variant: LepskiVariant,
    cfg: &LepskiConfig,
) -> Result<LepskiSelection> {
    match variant {
        LepskiVariant::Standard => lepski_standard(points, kernel, cfg),
        LepskiVariant::EpsilonReference(eps) => lepski_epsilon_reference(points, kernel, eps, cfg),
        LepskiVariant::Reverse(beta0) => lepski_reverse(points, kernel, beta0, cfg),
        LepskiVariant::ReverseConservative(b) => {
            lepski_reverse_conservative(points, kernel, b, cfg)
        }
    }
}
