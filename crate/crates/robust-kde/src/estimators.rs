//! Kernel point-estimators of the density at the origin and the oracle
//! bandwidth formulas for the three contamination regimes.

use crate::error::{Error, Result};
use crate::kernels::{eval_kernel, product_kernel_eval, Kernel};

/// Normalization of the kernel sum: `1/n`, or `1/(n(1-ε))` when the
/// contamination proportion is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    Plain,
    KnownEpsilon(f64),
}

impl Normalization {
    fn factor(&self, n: usize) -> Result<f64> {
        match *self {
            Normalization::Plain => Ok(1.0 / n as f64),
            Normalization::KnownEpsilon(epsilon) => {
                if !(0.0..=0.5).contains(&epsilon) {
                    return Err(Error::InvalidParameter(format!(
                        "known epsilon must lie in [0, 1/2], got {epsilon}"
                    )));
                }
                Ok(1.0 / (n as f64 * (1.0 - epsilon)))
            }
        }
    }
}

/// Kernel density estimate of `f(0)`:
/// `norm · Σ_i h^{-1} K(X_i / h)`.
pub fn kde_at_zero(points: &[f64], kernel: &Kernel, h: f64, norm: Normalization) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::NonPositiveBandwidth(h));
    }
    let sum: f64 = points.iter().map(|&x| eval_kernel(kernel, x / h) / h).sum();
    Ok(norm.factor(points.len())? * sum)
}

/// Multivariate estimate with a product kernel:
/// `norm · Σ_i h^{-d} ∏_j K(X_ij / h)`.
pub fn kde_at_zero_multivariate(
    points: &[Vec<f64>],
    kernel: &Kernel,
    h: f64,
    norm: Normalization,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::NonPositiveBandwidth(h));
    }
    let d = points[0].len();
    if d == 0 {
        return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
    }
    let scale = h.powi(d as i32);
    let mut sum = 0.0;
    for point in points {
        if point.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: point.len(),
            });
        }
        let scaled: Vec<f64> = point.iter().map(|&x| x / h).collect();
        sum += product_kernel_eval(kernel, &scaled)? / scale;
    }
    Ok(norm.factor(points.len())? * sum)
}

/// Oracle bandwidth for structured contamination:
/// `n^{-1/(2β0+1)} ∧ n^{-1/(2β1+1)} ε^{-2/(2β1+1)}`.
///
/// At `ε = 0` the second branch is infinite and the classical bandwidth
/// is returned.
pub fn oracle_bandwidth_structured(n: usize, epsilon: f64, beta0: f64, beta1: f64) -> f64 {
    let nf = n as f64;
    let classical = nf.powf(-1.0 / (2.0 * beta0 + 1.0));
    if epsilon <= 0.0 {
        return classical;
    }
    let contaminated =
        nf.powf(-1.0 / (2.0 * beta1 + 1.0)) * epsilon.powf(-2.0 / (2.0 * beta1 + 1.0));
    classical.min(contaminated)
}

/// Classical bandwidth `n^{-1/(2β0+1)}` for the plain estimator.
pub fn oracle_bandwidth_plain(n: usize, beta0: f64) -> f64 {
    (n as f64).powf(-1.0 / (2.0 * beta0 + 1.0))
}

/// Oracle bandwidth for arbitrary contamination:
/// `n^{-1/(2β0+1)} ∨ ε^{1/(β0+1)}`.
pub fn oracle_bandwidth_arbitrary(n: usize, epsilon: f64, beta0: f64) -> f64 {
    let classical = oracle_bandwidth_plain(n, beta0);
    if epsilon <= 0.0 {
        return classical;
    }
    classical.max(epsilon.powf(1.0 / (beta0 + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::make_order_kernel;
    use proptest::prelude::*;

    #[test]
    fn kde_locality_far_points_contribute_zero() {
        let k = make_order_kernel(0);
        let points = vec![3.0, -4.5, 7.2];
        let v = kde_at_zero(&points, &k, 1.0, Normalization::Plain).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn kde_single_point_examples() {
        let k = make_order_kernel(0);
        let v = kde_at_zero(&[0.0], &k, 1.0, Normalization::Plain).unwrap();
        assert_eq!(v, 0.5);
        let v = kde_at_zero(&[0.0], &k, 1.0, Normalization::KnownEpsilon(0.5)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kde_rejects_bad_inputs() {
        let k = make_order_kernel(0);
        assert!(matches!(
            kde_at_zero(&[], &k, 1.0, Normalization::Plain),
            Err(Error::EmptySample)
        ));
        assert!(matches!(
            kde_at_zero(&[0.0], &k, 0.0, Normalization::Plain),
            Err(Error::NonPositiveBandwidth(_))
        ));
        assert!(kde_at_zero(&[0.0], &k, 1.0, Normalization::KnownEpsilon(0.7)).is_err());
    }

    #[test]
    fn unnormalized_sum_invariant_under_far_points() {
        // adding a far point changes only the normalization count
        let k = make_order_kernel(2);
        let mut points = vec![0.1, -0.2, 0.05];
        let before = kde_at_zero(&points, &k, 0.5, Normalization::Plain).unwrap() * 3.0;
        points.push(100.0);
        let after = kde_at_zero(&points, &k, 0.5, Normalization::Plain).unwrap() * 4.0;
        assert!((before - after).abs() < 1e-14);
    }

    #[test]
    fn kde_is_linear_in_concatenation() {
        let k = make_order_kernel(2);
        let a = vec![0.1, -0.3, 0.2];
        let b = vec![0.0, 0.4];
        let va = kde_at_zero(&a, &k, 0.7, Normalization::Plain).unwrap();
        let vb = kde_at_zero(&b, &k, 0.7, Normalization::Plain).unwrap();
        let joined: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
        let vj = kde_at_zero(&joined, &k, 0.7, Normalization::Plain).unwrap();
        let weighted = (3.0 * va + 2.0 * vb) / 5.0;
        assert!((vj - weighted).abs() < 1e-14);
    }

    #[test]
    fn bandwidth_formula_examples() {
        // n = 1e4, ε = 0.1, β0 = 2, β1 = 1 → min(10^{-0.8}, 10^{-4/3} 10^{2/3})
        let h = oracle_bandwidth_structured(10_000, 0.1, 2.0, 1.0);
        assert!((h - 0.158_489_319_246_111_35).abs() < 1e-12);
        assert_eq!(
            oracle_bandwidth_structured(10_000, 0.0, 2.0, 1.0),
            oracle_bandwidth_plain(10_000, 2.0)
        );

        let h = oracle_bandwidth_plain(1024, 1.0);
        assert!((h - 0.099_212_565_748_012_47).abs() < 1e-12);
        assert_eq!(oracle_bandwidth_plain(1, 3.0), 1.0);

        // n = 1e4, ε = 0.01, β0 = 1 → max(0.046416, 0.1)
        let h = oracle_bandwidth_arbitrary(10_000, 0.01, 1.0);
        assert!((h - 0.1).abs() < 1e-12);
        assert_eq!(
            oracle_bandwidth_arbitrary(10_000, 0.0, 1.0),
            oracle_bandwidth_plain(10_000, 1.0)
        );
    }

    #[test]
    fn multivariate_reduces_to_univariate_in_dimension_one() {
        let k = make_order_kernel(2);
        let xs = vec![0.1, -0.4, 0.3, 0.9];
        let uni = kde_at_zero(&xs, &k, 0.6, Normalization::Plain).unwrap();
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let multi = kde_at_zero_multivariate(&pts, &k, 0.6, Normalization::Plain).unwrap();
        assert!((uni - multi).abs() < 1e-15);
    }

    #[test]
    fn multivariate_examples_and_errors() {
        let k = make_order_kernel(0);
        let v = kde_at_zero_multivariate(&[vec![0.0, 0.0]], &k, 1.0, Normalization::Plain).unwrap();
        assert_eq!(v, 0.25);
        let v = kde_at_zero_multivariate(
            &[vec![2.0, 0.1], vec![0.3, -3.0]],
            &k,
            1.0,
            Normalization::Plain,
        )
        .unwrap();
        assert_eq!(v, 0.0);
        assert!(matches!(
            kde_at_zero_multivariate(&[vec![0.0, 0.0], vec![0.1]], &k, 1.0, Normalization::Plain),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn bandwidth_ordering_chain(
            n in 2usize..2_000_000,
            epsilon in 1e-6f64..0.5,
            beta0 in 0.2f64..6.0,
            beta1 in 0.2f64..6.0,
        ) {
            let structured = oracle_bandwidth_structured(n, epsilon, beta0, beta1);
            let plain = oracle_bandwidth_plain(n, beta0);
            let arbitrary = oracle_bandwidth_arbitrary(n, epsilon, beta0);
            prop_assert!(structured <= plain + 1e-15);
            prop_assert!(plain <= arbitrary + 1e-15);
        }

        #[test]
        fn plain_bandwidth_monotone_in_n(beta0 in 0.2f64..6.0, n in 2usize..100_000) {
            prop_assert!(oracle_bandwidth_plain(n + 1, beta0) < oracle_bandwidth_plain(n, beta0));
        }
    }
}
