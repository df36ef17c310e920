//! Acceptance suite: one test per release gate, each printing a pass/fail
//! line. Slope gates run the full Monte Carlo pipeline at desk scale with
//! pinned seeds; certificate gates are deterministic numerics.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::time::Instant;

use robust_kde::bench::{
    fit_rate_exponent, rate_sweep, theory_rate, ContaminationSpec, EstimatorSpec,
    ExperimentConfig, Regime, SpikeWidth, TargetSpec,
};
use robust_kde::certificates::{
    density_difference_decompose, is_density_difference, le_cam_bound, modulus_of_continuity,
    ModulusSearch,
};
use robust_kde::densities::pairs::{
    pair_level, pair_neighborhood, pair_proportion, pair_unidentifiable,
};
use robust_kde::densities::{bump_b, gaussian_baseline, mollifier};
use robust_kde::kernels::{check_kernel_class, make_order_kernel};

/// Gaussian contamination scale with density exactly 1 at the origin.
const UNIT_LEVEL_SCALE: f64 = 0.398_942_280_401_432_7;

fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "[acceptance] {criterion}: {} ({detail})",
        if pass { "pass" } else { "FAIL" }
    );
    pass
}

#[test]
fn criterion_01_kernel_class_orders_zero_through_six() {
    let start = Instant::now();
    let mut all = true;
    for order in 0..=6 {
        let kernel = make_order_kernel(order);
        let radius = kernel
            .sup_norm_bound()
            .max(kernel.l2_bound())
            .max(kernel.abs_moment_bound())
            * 1.01;
        let rep = check_kernel_class(&kernel, order, radius, 1e-8).unwrap();
        all &= rep.pass();
    }
    let elapsed = start.elapsed();
    let pass = all && elapsed.as_secs_f64() < 1.0;
    assert!(report(
        "criterion 1 kernel class l in 0..=6",
        pass,
        &format!("all orders pass, elapsed {:.3}s", elapsed.as_secs_f64())
    ));
}

#[test]
fn criterion_02_classical_rate_slope() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        estimator: EstimatorSpec::OraclePlain,
        kernel_order: 2,
        beta0: 2.0,
        beta1: 2.0,
        n_grid: vec![512, 1024, 2048, 4096, 8192, 16384],
        replications: 200,
        master_seed: 11,
        ..ExperimentConfig::default()
    };
    let rpt = rate_sweep(&cfg).unwrap();
    let slope = rpt.slope.unwrap().slope;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = (slope + 0.8).abs() <= 0.15 && elapsed <= 120.0;
    assert!(report(
        "criterion 2 classical rate slope -0.8 +- 0.15",
        pass,
        &format!("slope = {slope:.4}, elapsed {elapsed:.1}s")
    ));
}

#[test]
fn criterion_03_structured_contamination_floor_slope() {
    let cfg = ExperimentConfig {
        estimator: EstimatorSpec::OracleStructured,
        contamination: ContaminationSpec::Gaussian {
            scale: UNIT_LEVEL_SCALE,
        },
        m: 1.0,
        beta0: 2.0,
        beta1: 2.0,
        kernel_order: 2,
        n_grid: vec![16384],
        epsilon_grid: Some(vec![0.02, 0.04, 0.08, 0.16]),
        replications: 200,
        master_seed: 12,
        ..ExperimentConfig::default()
    };
    let rpt = rate_sweep(&cfg).unwrap();
    let slope = rpt.slope.unwrap().slope;
    let pass = (slope - 2.0).abs() <= 0.3;
    assert!(report(
        "criterion 3 structured floor slope 2 +- 0.3",
        pass,
        &format!("slope = {slope:.4}")
    ));
}

#[test]
fn criterion_04_arbitrary_contamination_floor_slope() {
    let cfg = ExperimentConfig {
        estimator: EstimatorSpec::OracleArbitrary,
        target: TargetSpec::Gaussian { scale: 2.0 },
        contamination: ContaminationSpec::Spike {
            location: 0.0,
            width: SpikeWidth::MatchOracleBandwidth,
        },
        regime: Regime::Arbitrary,
        beta0: 1.0,
        kernel_order: 1,
        n_grid: vec![16384],
        epsilon_grid: Some(vec![0.02, 0.04, 0.08, 0.16]),
        replications: 200,
        master_seed: 13,
        ..ExperimentConfig::default()
    };
    let rpt = rate_sweep(&cfg).unwrap();
    let slope = rpt.slope.unwrap().slope;
    // 2 beta0 / (beta0 + 1) = 1 at beta0 = 1
    let pass = (slope - 1.0).abs() <= 0.3;
    assert!(report(
        "criterion 4 arbitrary floor slope 1 +- 0.3",
        pass,
        &format!("slope = {slope:.4}")
    ));
}

#[test]
fn criterion_05_mixture_identity_certificates() {
    let grid = 10_000;
    let mut pass = true;
    let mut worst_disc = 0.0f64;
    let mut worst_chi = 0.0f64;
    for pair in [
        pair_level(0.1, 1.0, 1.0, 1.0, 5.0, 5.0).unwrap(),
        pair_proportion(0.2, 0.1, 1.0, 1.0, 5.0, 5.0).unwrap(),
        pair_unidentifiable(0.01, 1.0, 5.0).unwrap(),
    ] {
        let disc = pair.max_mixture_discrepancy(grid);
        let chi = le_cam_bound(&pair, 1).chi2_single;
        worst_disc = worst_disc.max(disc);
        worst_chi = worst_chi.max(chi);
        pass &= disc <= 1e-10 && chi <= 1e-10;
    }

    let pair = pair_neighborhood(0.1, 10_000, 2.0, 1.0, 10.0, 10.0).unwrap();
    let g0 = pair.g.evaluate(0.0).abs();
    let g0_tilde = pair.g_tilde.evaluate(0.0).abs();
    let c = &pair.constants;
    let residual =
        (c.c2 * c.h.powf(2.0) * mollifier(0.0) - c.c3 * c.h_tilde.powf(1.0) * bump_b(0.0)).abs();
    pass &= g0 <= 1e-12 && g0_tilde <= 1e-12 && residual <= 1e-12;

    assert!(report(
        "criterion 5 mixture-identity certificates",
        pass,
        &format!(
            "max discrepancy {worst_disc:.2e}, max chi2 {worst_chi:.2e}, g(0) {g0:.2e}, relation residual {residual:.2e}"
        )
    ));
}

#[test]
fn criterion_06_le_cam_certificate_rate() {
    let (beta0, beta1, eps) = (2.0, 1.0, 0.1);
    let mut pass = true;
    let mut detail = String::new();
    for &n in &[1_000usize, 10_000, 100_000] {
        let pair = pair_neighborhood(eps, n, beta0, beta1, 10.0, 10.0).unwrap();
        let cert = le_cam_bound(&pair, n);
        let theory = eps.powf(2.0 / (2.0 * beta1 + 1.0))
            * (n as f64).powf(-2.0 * beta1 / (2.0 * beta1 + 1.0));
        let ratio = cert.lecam_bound / theory;
        pass &= (1e-3..=1e3).contains(&ratio) && cert.chi2_joint <= 3.0;
        detail.push_str(&format!(
            "n={n}: ratio={ratio:.3e} chi2_joint={:.3}; ",
            cert.chi2_joint
        ));
    }
    assert!(report(
        "criterion 6 Le Cam certificate rate band",
        pass,
        detail.trim_end_matches("; ")
    ));
}

#[test]
fn criterion_07_lepski_adaptivity() {
    let mut pass = true;
    let mut detail = String::new();
    for &beta0 in &[1.0, 2.0] {
        for &eps in &[0.0, 0.05] {
            let cfg = ExperimentConfig {
                estimator: EstimatorSpec::LepskiStandard {
                    known_epsilon: false,
                },
                contamination: ContaminationSpec::Gaussian {
                    scale: UNIT_LEVEL_SCALE,
                },
                epsilon: eps,
                m: 1.0,
                beta0,
                beta1: beta0,
                regime: Regime::StructuredAdaptBoth,
                n_grid: vec![8192],
                replications: 200,
                master_seed: 14,
                ..ExperimentConfig::default()
            };
            let rpt = rate_sweep(&cfg).unwrap();
            let cell = &rpt.cells[0];
            let theory =
                theory_rate(Regime::StructuredAdaptBoth, 8192, eps, beta0, beta0, 1.0).unwrap();
            pass &= cell.mse <= 10.0 * theory;
            detail.push_str(&format!(
                "(b0={beta0},eps={eps}): mse={:.2e} vs 10x{:.2e}; ",
                cell.mse, theory
            ));
        }
    }
    assert!(report(
        "criterion 7 Lepski adaptivity within 10x adaptive rate",
        pass,
        detail.trim_end_matches("; ")
    ));
}

#[test]
fn criterion_08_reverse_lepski_consistency_path() {
    let path = [(1024usize, 0.1), (4096, 0.05), (16384, 0.025)];
    let mut mses = Vec::new();
    for &(n, eps) in &path {
        let cfg = ExperimentConfig {
            estimator: EstimatorSpec::LepskiReverseConservative { beta0_lower: 1.0 },
            contamination: ContaminationSpec::Spike {
                location: 0.0,
                width: SpikeWidth::Fixed(0.01),
            },
            epsilon: eps,
            beta0: 2.0,
            regime: Regime::ArbitraryAdaptOne,
            n_grid: vec![n],
            replications: 200,
            master_seed: 15,
            ..ExperimentConfig::default()
        };
        let rpt = rate_sweep(&cfg).unwrap();
        mses.push(rpt.cells[0].mse);
    }
    let pass = mses.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = mses.iter().map(|m| format!("{m:.3e}")).collect();
    assert!(report(
        "criterion 8 reverse-Lepski MSE strictly decreasing",
        pass,
        &format!("mse path = {}", shown.join(" -> "))
    ));
}

#[test]
fn criterion_09_density_difference_oracle() {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut pass = true;

    let zero = is_density_difference(|_| 0.0, -1.0, 1.0, 1e-9);
    pass &= zero.is_difference;

    let d1 = move |x: f64| phi(x) - phi(x - 3.0);
    let c1 = is_density_difference(d1, -12.0, 15.0, 1e-9);
    pass &= c1.is_difference && (c1.abs_integral - 1.732_771_194_924_567_7).abs() < 1e-7;

    let d2 = move |x: f64| 2.0 * (phi(x) - phi(x - 3.0));
    let c2 = is_density_difference(d2, -12.0, 15.0, 1e-9);
    pass &= !c2.is_difference;

    // decomposition residual on a dense grid
    let base = gaussian_baseline(5.0).unwrap();
    let (plus, minus) = density_difference_decompose(d1, -12.0, 15.0, &base).unwrap();
    let (lo, hi) = plus.support();
    let mut max_residual = 0.0f64;
    for i in 0..10_000 {
        let x = lo + (hi - lo) * i as f64 / 9_999.0;
        max_residual = max_residual.max(((plus.evaluate(x) - minus.evaluate(x)) - d1(x)).abs());
    }
    pass &= max_residual <= 1e-8;

    assert!(report(
        "criterion 9 density-difference criterion and decomposition",
        pass,
        &format!(
            "int|d| = {:.6}, doubled {:.6}, residual {max_residual:.2e}",
            c1.abs_integral, c2.abs_integral
        )
    ));
}

#[test]
fn criterion_10_modulus_of_continuity_slopes() {
    let search = ModulusSearch::default();
    let epsilons = [0.01, 0.02, 0.04, 0.08];
    let mut pass = true;
    let mut detail = String::new();
    for &(beta0, l0) in &[(1.0, 10.0), (2.0, 80.0)] {
        let cells: Vec<(f64, f64)> = epsilons
            .iter()
            .map(|&e| {
                (
                    e,
                    modulus_of_continuity(beta0, l0, e, &search).unwrap().estimate,
                )
            })
            .collect();
        let slope = fit_rate_exponent(&cells).unwrap().slope;
        let expected = 2.0 * beta0 / (beta0 + 1.0);
        pass &= (slope - expected).abs() <= 0.1;
        detail.push_str(&format!("b0={beta0}: slope={slope:.4} vs {expected:.4}; "));
    }
    assert!(report(
        "criterion 10 modulus slope 2b/(b+1) +- 0.1",
        pass,
        detail.trim_end_matches("; ")
    ));
}

#[test]
fn criterion_11_rate_sweep_determinism() {
    let dir = std::env::temp_dir();
    let path_a = dir.join("robust-kde-acceptance-sweep-a.csv");
    let path_b = dir.join("robust-kde-acceptance-sweep-b.csv");
    let make_cfg = |path: std::path::PathBuf| ExperimentConfig {
        estimator: EstimatorSpec::LepskiStandard {
            known_epsilon: false,
        },
        contamination: ContaminationSpec::Gaussian {
            scale: UNIT_LEVEL_SCALE,
        },
        epsilon: 0.05,
        m: 1.0,
        n_grid: vec![256, 512, 1024],
        replications: 20,
        master_seed: 42,
        output_path: Some(path),
        ..ExperimentConfig::default()
    };
    let a = rate_sweep(&make_cfg(path_a.clone())).unwrap();
    let b = rate_sweep(&make_cfg(path_b.clone())).unwrap();
    let bytes_a = std::fs::read(&path_a).unwrap();
    let bytes_b = std::fs::read(&path_b).unwrap();
    let _ = std::fs::remove_file(&path_a);
    let _ = std::fs::remove_file(&path_b);
    let pass = a.csv == b.csv && bytes_a == bytes_b && !bytes_a.is_empty();
    assert!(report(
        "criterion 11 byte-identical CSV under fixed seed",
        pass,
        &format!("{} bytes compared", bytes_a.len())
    ));
}
