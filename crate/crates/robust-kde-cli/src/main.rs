//! Command-line front end: kernel certification, Monte Carlo rate sweeps,
//! adaptive-selector demos, and lower-bound certificates, all emitting CSV.
//!
//! Exit codes: 0 success, 2 config error, 3 infeasible construction,
//! 1 anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use robust_kde::adaptation::{select_bandwidth, LepskiConfig, LepskiVariant};
use robust_kde::bench::{rate_sweep, ExperimentConfig};
use robust_kde::certificates::{
    le_cam_bound, modulus_of_continuity, ModulusSearch, TwoPointCertificate,
};
use robust_kde::contamination::{sample_mixture, ContaminatedModel};
use robust_kde::densities::pairs::{
    pair_arbitrary, pair_level, pair_neighborhood, pair_proportion, pair_unidentifiable,
    PerturbationPair,
};
use robust_kde::error::Error;
use robust_kde::estimators::Normalization;
use robust_kde::kernels::{check_kernel_class, make_order_kernel};

#[derive(Parser)]
#[command(
    name = "robust-kde",
    about = "Pointwise density estimation under contamination: estimators, adaptive bandwidths, and lower-bound certificates"
)]
struct Cli {
    /// Master seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the primary CSV output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Key-value config file (`key = value` per line), applied before flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the kernel-class conditions of a constructed kernel.
    KernelCheck(KernelCheckArgs),
    /// Monte Carlo risk sweep over n or epsilon with a rate-exponent fit.
    RateSweep(RateSweepArgs),
    /// Run one adaptive bandwidth selector on a synthetic sample and dump
    /// its estimates, test matrix, and selection.
    AdaptDemo(AdaptDemoArgs),
    /// Build a two-point lower-bound certificate or a modulus estimate.
    Certificate(CertificateArgs),
}

#[derive(Args)]
struct KernelCheckArgs {
    /// Kernel order (number of vanishing moments).
    #[arg(long)]
    order: usize,
    /// Tolerance for the mass and moment conditions.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Class radius L; defaults to just above the kernel's own bounds.
    #[arg(long)]
    radius: Option<f64>,
    /// Also write the report as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RateSweepArgs {
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    target_scale: Option<String>,
    /// none | gaussian:SCALE | spike:LOC,SCALE | spike:LOC,match | pointmass:LOC
    #[arg(long)]
    contamination: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    beta0: Option<String>,
    #[arg(long)]
    beta1: Option<String>,
    #[arg(long)]
    c1: Option<String>,
    #[arg(long)]
    kernel_order: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long)]
    n_grid: Option<String>,
    /// Comma-separated contamination proportions (epsilon-axis sweep).
    #[arg(long)]
    epsilon_grid: Option<String>,
    #[arg(long)]
    replications: Option<String>,
}

#[derive(Args)]
struct AdaptDemoArgs {
    /// standard | eps-ref | reverse | reverse-cons
    #[arg(long)]
    variant: String,
    /// Threshold constant; defaults to 4 sqrt(sup|K| * int K^2).
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 2.0)]
    beta0: f64,
    #[arg(long, default_value_t = 1.0)]
    beta0_tilde: f64,
    #[arg(long, default_value_t = 6)]
    kernel_order: usize,
    #[arg(long, default_value_t = 1.0)]
    target_scale: f64,
    /// Contamination spec, as in rate-sweep.
    #[arg(long, default_value = "none")]
    contamination: String,
    /// plain | known-eps
    #[arg(long, default_value = "plain")]
    norm: String,
}

#[derive(Args)]
struct CertificateArgs {
    /// level | neighborhood | proportion | arbitrary | unidentifiable | modulus
    #[arg(long)]
    name: String,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon_tilde: f64,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, default_value_t = 2.0)]
    beta0: f64,
    #[arg(long, default_value_t = 1.0)]
    beta1: f64,
    #[arg(long, default_value_t = 1.0)]
    beta0_tilde: f64,
    #[arg(long, default_value_t = 10.0)]
    l0: f64,
    #[arg(long, default_value_t = 10.0)]
    l1: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) | Error::InvalidParameter(_) => ExitCode::from(2),
                Error::Infeasible(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::KernelCheck(args) => kernel_check(args),
        Command::RateSweep(args) => sweep(&cli.seed, &cli.out, &cli.config, args),
        Command::AdaptDemo(args) => adapt_demo(cli.seed, &cli.out, args),
        Command::Certificate(args) => certificate(&cli.out, args),
    }
}

fn kernel_check(args: KernelCheckArgs) -> Result<(), Error> {
    let kernel = make_order_kernel(args.order);
    let radius = args.radius.unwrap_or_else(|| {
        kernel
            .sup_norm_bound()
            .max(kernel.l2_bound())
            .max(kernel.abs_moment_bound())
            * 1.01
    });
    let report = check_kernel_class(&kernel, args.order, radius, args.tol)?;

    println!(
        "kernel order {} on [-{r}, {r}], class radius {radius:.6}, tol {tol:e}",
        args.order,
        r = kernel.support_radius(),
        tol = args.tol,
    );
    println!("{:<22} {:>16} {:>16} {:>6}", "condition", "measured", "bound", "pass");
    for c in &report.conditions {
        println!(
            "{:<22} {:>16.9e} {:>16.9e} {:>6}",
            c.name, c.measured, c.bound, c.pass
        );
    }
    println!("overall: {}", if report.pass() { "pass" } else { "FAIL" });

    if let Some(path) = args.csv {
        let mut body = String::from("condition,measured,bound,pass\n");
        for c in &report.conditions {
            body.push_str(&format!("{},{},{},{}\n", c.name, c.measured, c.bound, c.pass));
        }
        std::fs::write(path, body)?;
    }
    Ok(())
}

fn sweep(
    seed: &u64,
    out: &Option<PathBuf>,
    config: &Option<PathBuf>,
    args: RateSweepArgs,
) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = config {
        let body = std::fs::read_to_string(path)?;
        cfg.apply_config_str(&body)?;
    }
    let flags: [(&str, &Option<String>); 13] = [
        ("estimator", &args.estimator),
        ("regime", &args.regime),
        ("target_scale", &args.target_scale),
        ("contamination", &args.contamination),
        ("epsilon", &args.epsilon),
        ("m", &args.m),
        ("beta0", &args.beta0),
        ("beta1", &args.beta1),
        ("c1", &args.c1),
        ("kernel_order", &args.kernel_order),
        ("n_grid", &args.n_grid),
        ("epsilon_grid", &args.epsilon_grid),
        ("replications", &args.replications),
    ];
    for (key, value) in flags {
        if let Some(value) = value {
            cfg.apply_kv(key, value)?;
        }
    }
    cfg.master_seed = *seed;
    if let Some(path) = out {
        cfg.output_path = Some(path.clone());
    }

    let report = rate_sweep(&cfg)?;
    for cell in &report.cells {
        println!(
            "n = {:>7}  epsilon = {:<8}  mse = {:.6e}  stderr = {:.2e}  theory = {:.6e}{}",
            cell.n,
            cell.epsilon,
            cell.mse,
            cell.stderr,
            cell.theory,
            cell.mean_h_hat
                .map_or(String::new(), |h| format!("  mean_h_hat = {h:.5}")),
        );
    }
    match report.slope {
        Some(fit) => println!("fitted log-log slope: {:.4} (stderr {:.4})", fit.slope, fit.stderr),
        None => println!("fitted log-log slope: undefined for this sweep"),
    }
    match &cfg.output_path {
        None => print!("{}", report.csv),
        Some(path) => println!("csv written to {}", path.display()),
    }
    Ok(())
}

fn adapt_demo(seed: u64, out: &Option<PathBuf>, args: AdaptDemoArgs) -> Result<(), Error> {
    let mut cfg = ExperimentConfig {
        epsilon: args.epsilon,
        kernel_order: args.kernel_order,
        ..ExperimentConfig::default()
    };
    cfg.apply_kv("target_scale", &args.target_scale.to_string())?;
    cfg.apply_kv("contamination", &args.contamination)?;

    let kernel = make_order_kernel(args.kernel_order);
    let c1 = args.c1.unwrap_or_else(|| LepskiConfig::default_c1(&kernel));
    let norm = match args.norm.as_str() {
        "plain" => Normalization::Plain,
        "known-eps" => Normalization::KnownEpsilon(args.epsilon),
        other => return Err(Error::Config(format!("unknown norm '{other}'"))),
    };
    let variant = match args.variant.as_str() {
        "standard" => LepskiVariant::Standard,
        "eps-ref" => LepskiVariant::EpsilonReference(args.epsilon),
        "reverse" => LepskiVariant::Reverse(args.beta0),
        "reverse-cons" => LepskiVariant::ReverseConservative(args.beta0_tilde),
        other => return Err(Error::Config(format!("unknown variant '{other}'"))),
    };

    let target = match cfg.target {
        robust_kde::bench::TargetSpec::Gaussian { scale } => {
            robust_kde::densities::gaussian_baseline(scale)?
        }
    };
    let contamination = build_contamination(&cfg)?;
    let model = ContaminatedModel::new(args.epsilon, target, contamination)?;
    let sample = sample_mixture(&model, args.n, seed)?;

    let lepski = LepskiConfig::for_sample_size(args.n, c1, norm);
    let selection = select_bandwidth(&sample.points, &kernel, variant, &lepski)?;

    let mut body = String::from("record,h,l,value,threshold,pass\n");
    for (h, est) in &selection.estimates {
        body.push_str(&format!("estimate,{h},,{est},,\n"));
    }
    for t in &selection.tests {
        body.push_str(&format!(
            "test,{},{},{},{},{}\n",
            t.h, t.l, t.difference, t.threshold, t.pass
        ));
    }
    body.push_str(&format!(
        "selected,{},,{},,{}\n",
        selection.h_hat,
        selection.estimate,
        !selection.from_empty_set
    ));
    emit(out, &body)
}

fn build_contamination(
    cfg: &ExperimentConfig,
) -> Result<robust_kde::contamination::Contamination, Error> {
    use robust_kde::bench::{ContaminationSpec, SpikeWidth};
    use robust_kde::contamination::{adversarial_spike, ArbitrarySampler, Contamination};
    Ok(match cfg.contamination {
        ContaminationSpec::None => Contamination::None,
        ContaminationSpec::Gaussian { scale } => Contamination::Structured {
            density: robust_kde::densities::gaussian_baseline(scale)?,
            level: None,
        },
        ContaminationSpec::PointMass { location } => {
            Contamination::Arbitrary(ArbitrarySampler::PointMass { location })
        }
        ContaminationSpec::Spike { location, width } => {
            let scale = match width {
                SpikeWidth::Fixed(s) => s,
                SpikeWidth::MatchOracleBandwidth => {
                    return Err(Error::Config(
                        "spike width 'match' is only available in rate-sweep".into(),
                    ))
                }
            };
            Contamination::Arbitrary(adversarial_spike(scale, location)?)
        }
    })
}

fn certificate(out: &Option<PathBuf>, args: CertificateArgs) -> Result<(), Error> {
    let header = "name,n,epsilon,beta0,beta1,m,chi2_single,chi2_joint,delta,lecam_bound,feasible\n";

    if args.name == "modulus" {
        let report = modulus_of_continuity(args.beta0, args.l0, args.epsilon, &ModulusSearch::default())?;
        println!(
            "modulus estimate at epsilon = {}: {:.6e} (h* = {:.5}, amplitude = {:.5})",
            args.epsilon, report.estimate, report.h_star, report.amplitude
        );
        let body = format!(
            "{header}modulus,{},{},{},NA,NA,NA,NA,{},NA,{}\n",
            args.n,
            args.epsilon,
            args.beta0,
            report.estimate,
            report.estimate > 0.0
        );
        return emit(out, &body);
    }

    let pair: PerturbationPair = match args.name.as_str() {
        "level" => pair_level(args.epsilon, args.m, args.beta0, args.beta1, args.l0, args.l1)?,
        "neighborhood" => pair_neighborhood(
            args.epsilon,
            args.n,
            args.beta0,
            args.beta1,
            args.l0,
            args.l1,
        )?,
        "proportion" => pair_proportion(
            args.epsilon,
            args.epsilon_tilde,
            args.beta0,
            args.beta1,
            args.l0,
            args.l1,
        )?,
        "arbitrary" => pair_arbitrary(args.epsilon, args.beta0, args.l0)?,
        "unidentifiable" => pair_unidentifiable(args.epsilon, args.beta0_tilde, args.l0)?,
        other => return Err(Error::Config(format!("unknown certificate '{other}'"))),
    };

    let cert: TwoPointCertificate = le_cam_bound(&pair, args.n);
    println!("certificate '{}' with n = {}:", args.name, args.n);
    println!("  separation delta   = {:.6e}", cert.delta);
    println!("  chi2 single        = {:.6e}", cert.chi2_single);
    println!("  chi2 joint (n-fold)= {:.6e}", cert.chi2_joint);
    println!("  le cam bound       = {:.6e}", cert.lecam_bound);
    println!("  constants          = {:?}", cert.pair.constants);

    let m_field = if cert.pair.m.is_infinite() {
        "inf".to_string()
    } else {
        format!("{}", cert.pair.m)
    };
    let body = format!(
        "{header}{},{},{},{},{},{},{},{},{},{},{}\n",
        args.name,
        args.n,
        cert.pair.epsilon,
        args.beta0,
        args.beta1,
        m_field,
        cert.chi2_single,
        cert.chi2_joint,
        cert.delta,
        cert.lecam_bound,
        !cert.support_violation
    );
    emit(out, &body)
}
