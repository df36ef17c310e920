//! Higher-order kernels with certified moment properties.
//!
//! A kernel of order `l` integrates to one and has vanishing moments
//! `∫ x^j K(x) dx = 0` for `j = 1..l`. We build them by the classical
//! orthogonal-polynomial construction on `[-1, 1]`: with orthonormal
//! Legendre polynomials `φ_m`,
//!
//! ```text
//! K(u) = Σ_{m=0}^{l} φ_m(0) φ_m(u)   for |u| ≤ 1, else 0.
//! ```
//!
//! Expanding `x^j` in the same basis shows `∫ x^j K = 0^j` for `j ≤ l`,
//! which is exactly the order-`l` moment condition. Odd-degree Legendre
//! polynomials vanish at 0, so every constructed kernel is even.

use crate::error::{Error, Result};
use crate::quad;

/// Grid used to bound the sup norm of a kernel polynomial.
const SUP_SCAN_POINTS: usize = 4001;
/// Slack applied to measured bounds so the stored certificates dominate
/// the quadrature values they certify.
const BOUND_SLACK: f64 = 1.0 + 1e-9;

/// An order-`l` kernel supported on `[-support_radius, support_radius]`,
/// stored as coefficients in the (unnormalized) Legendre basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    order: usize,
    support_radius: f64,
    /// `coefficients[m]` multiplies the Legendre polynomial `P_m`.
    coefficients: Vec<f64>,
    sup_norm_bound: f64,
    l2_bound: f64,
    abs_moment_bound: f64,
}

impl Kernel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Certified upper bound on `‖K‖∞`.
    pub fn sup_norm_bound(&self) -> f64 {
        self.sup_norm_bound
    }

    /// Certified upper bound on `∫ K²`.
    pub fn l2_bound(&self) -> f64 {
        self.l2_bound
    }

    /// Certified upper bound on `∫ |x|^l |K(x)| dx`.
    pub fn abs_moment_bound(&self) -> f64 {
        self.abs_moment_bound
    }
}

/// Evaluate `Σ c_m P_m(x)` by the Legendre three-term recurrence.
fn legendre_sum(coefficients: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    let mut p_prev = 1.0; // P_0
    let mut p_curr = x; // P_1
    for (m, &c) in coefficients.iter().enumerate() {
        let p_m = match m {
            0 => p_prev,
            1 => p_curr,
            _ => {
                let mf = (m - 1) as f64;
                let p_next = ((2.0 * mf + 1.0) * x * p_curr - mf * p_prev) / (mf + 1.0);
                p_prev = p_curr;
                p_curr = p_next;
                p_next
            }
        };
        total += c * p_m;
    }
    total
}

/// Build the order-`l` kernel of the Legendre family.
///
/// Deterministic: the coefficients are closed-form rationals, so the same
/// order always yields identical output. Order 0 is the box kernel `1/2`.
pub fn make_order_kernel(order: usize) -> Kernel {
    // P_m(0): zero for odd m, and P_{2k}(0) = -P_{2k-2}(0) * (2k-1)/(2k).
    let mut coefficients = vec![0.0; order + 1];
    let mut p_at_zero = 1.0;
    for (m, coefficient) in coefficients.iter_mut().enumerate() {
        if m % 2 == 0 {
            if m > 0 {
                let k = m as f64;
                p_at_zero *= -(k - 1.0) / k;
            }
            // orthonormal weight (2m+1)/2 times the φ_m(0) factor
            *coefficient = (2.0 * m as f64 + 1.0) / 2.0 * p_at_zero;
        }
    }

    let eval = |x: f64| {
        if x.abs() > 1.0 {
            0.0
        } else {
            legendre_sum(&coefficients, x)
        }
    };

    let mut sup = 0.0f64;
    for i in 0..SUP_SCAN_POINTS {
        let x = -1.0 + 2.0 * i as f64 / (SUP_SCAN_POINTS - 1) as f64;
        sup = sup.max(eval(x).abs());
    }
    let l2 = quad::integrate_default(|x| eval(x) * eval(x), -1.0, 1.0);
    let abs_moment =
        quad::integrate_default(|x| x.abs().powi(order as i32) * eval(x).abs(), -1.0, 1.0);

    Kernel {
        order,
        support_radius: 1.0,
        coefficients,
        sup_norm_bound: sup * BOUND_SLACK,
        l2_bound: l2 * BOUND_SLACK,
        abs_moment_bound: abs_moment * BOUND_SLACK,
    }
}

/// Evaluate `K(x)`; exactly zero outside the support.
pub fn eval_kernel(kernel: &Kernel, x: f64) -> f64 {
    if x.abs() > kernel.support_radius {
        return 0.0;
    }
    legendre_sum(&kernel.coefficients, x / kernel.support_radius) / kernel.support_radius
}

/// Evaluate the product kernel `∏_j K(x_j)` on a d-dimensional point.
pub fn product_kernel_eval(kernel: &Kernel, x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidParameter(
            "product kernel needs dimension d >= 1".into(),
        ));
    }
    Ok(x.iter().map(|&xi| eval_kernel(kernel, xi)).product())
}

/// One measured condition of the kernel-class check.
#[derive(Debug, Clone)]
pub struct ClassCondition {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Report of `check_kernel_class`: quadrature values of every class
/// condition for membership in the order-`l`, radius-`L` kernel class.
#[derive(Debug, Clone)]
pub struct KernelClassReport {
    pub order: usize,
    pub radius: f64,
    pub tol: f64,
    pub conditions: Vec<ClassCondition>,
}

impl KernelClassReport {
    pub fn pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }
}

/// Verify by quadrature that `kernel` satisfies the conditions of the
/// order-`l` class with radius `radius`: unit mass, vanishing moments
/// `j = 1..l`, and `‖K‖∞ ∨ ∫K² ∨ ∫|x|^l|K| ≤ radius`.
pub fn check_kernel_class(
    kernel: &Kernel,
    l: usize,
    radius: f64,
    tol: f64,
) -> Result<KernelClassReport> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let r = kernel.support_radius;
    let mut conditions = Vec::new();

    let mass = quad::integrate_default(|x| eval_kernel(kernel, x), -r, r);
    conditions.push(ClassCondition {
        name: "int K = 1".into(),
        measured: mass,
        bound: 1.0,
        pass: (mass - 1.0).abs() <= tol,
    });

    for j in 1..=l {
        let moment = quad::integrate_default(|x| x.powi(j as i32) * eval_kernel(kernel, x), -r, r);
        conditions.push(ClassCondition {
            name: format!("int x^{j} K = 0"),
            measured: moment,
            bound: 0.0,
            pass: moment.abs() <= tol,
        });
    }

    let mut sup = 0.0f64;
    for i in 0..SUP_SCAN_POINTS {
        let x = -r + 2.0 * r * i as f64 / (SUP_SCAN_POINTS - 1) as f64;
        sup = sup.max(eval_kernel(kernel, x).abs());
    }
    conditions.push(ClassCondition {
        name: "sup |K| <= L".into(),
        measured: sup,
        bound: radius,
        pass: sup <= radius + tol,
    });

    let l2 = quad::integrate_default(|x| eval_kernel(kernel, x).powi(2), -r, r);
    conditions.push(ClassCondition {
        name: "int K^2 <= L".into(),
        measured: l2,
        bound: radius,
        pass: l2 <= radius + tol,
    });

    let abs_moment =
        quad::integrate_default(|x| x.abs().powi(l as i32) * eval_kernel(kernel, x).abs(), -r, r);
    conditions.push(ClassCondition {
        name: format!("int |x|^{l} |K| <= L"),
        measured: abs_moment,
        bound: radius,
        pass: abs_moment <= radius + tol,
    });

    Ok(KernelClassReport {
        order: l,
        radius,
        tol,
        conditions,
    })
}
