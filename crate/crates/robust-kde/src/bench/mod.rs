//! Monte Carlo risk estimation, theoretical rate curves, rate-exponent
//! fits, and the experiment runner behind the CLI.
//!
//! Determinism contract: a sweep is a pure function of its config and
//! master seed. Per-replication seeds are derived by mixing the master
//! seed with the cell and replication indices through a splitmix-style
//! finalizer, and cells accumulate in fixed index order, so repeated runs
//! produce byte-identical CSV.

use std::fmt;
use std::path::PathBuf;

use crate::adaptation::{
    lepski_epsilon_reference, lepski_reverse, lepski_reverse_conservative, lepski_standard,
    LepskiConfig,
};
use crate::contamination::{
    adversarial_spike, sample_mixture, ArbitrarySampler, ContaminatedModel, Contamination,
};
use crate::densities::{gaussian_baseline, SmoothDensity};
use crate::error::{Error, Result};
use crate::estimators::{
    kde_at_zero, oracle_bandwidth_arbitrary, oracle_bandwidth_plain, oracle_bandwidth_structured,
    Normalization,
};
use crate::kernels::{make_order_kernel, Kernel};

/// Rate regime selecting which displayed rate `theory_rate` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Structured,
    StructuredAdaptEps,
    StructuredAdaptSmooth,
    StructuredAdaptBoth,
    Arbitrary,
    ArbitraryAdaptOne,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Structured => "structured",
            Regime::StructuredAdaptEps => "structured-adapt-eps",
            Regime::StructuredAdaptSmooth => "structured-adapt-smooth",
            Regime::StructuredAdaptBoth => "structured-adapt-both",
            Regime::Arbitrary => "arbitrary",
            Regime::ArbitraryAdaptOne => "arbitrary-adapt-one",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structured" => Ok(Regime::Structured),
            "structured-adapt-eps" => Ok(Regime::StructuredAdaptEps),
            "structured-adapt-smooth" => Ok(Regime::StructuredAdaptSmooth),
            "structured-adapt-both" => Ok(Regime::StructuredAdaptBoth),
            "arbitrary" => Ok(Regime::Arbitrary),
            "arbitrary-adapt-one" => Ok(Regime::ArbitraryAdaptOne),
            other => Err(Error::Config(format!("unknown regime '{other}'"))),
        }
    }
}

fn check_finite(name: &str, v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(Error::InvalidParameter(format!("{name} is required but missing")))
    } else {
        Ok(v)
    }
}

/// Evaluate the displayed minimax/adaptive rate for a regime.
///
/// Structured regimes use the three-term rate
/// `n^{-2β0/(2β0+1)} ∨ ε²(1∧m)² ∨ n^{-2β1/(2β1+1)} ε^{2/(2β1+1)}`;
/// the adaptation variants substitute `n → n/log n` and/or `(1∧m) → 1`.
/// Arbitrary regimes use `n^{-2β0/(2β0+1)} ∨ ε^{2β0/(β0+1)}`, with the
/// logarithmic factor under adaptation. Logs are natural.
pub fn theory_rate(
    regime: Regime,
    n: usize,
    epsilon: f64,
    beta0: f64,
    beta1: f64,
    m: f64,
) -> Result<f64> {
    let beta0 = check_finite("beta0", beta0)?;
    let nf = n.max(1) as f64;
    let log_n = (n.max(2) as f64).ln();
    let classical = |n_eff: f64, beta: f64| n_eff.powf(-2.0 * beta / (2.0 * beta + 1.0));

    let structured = |n_eff: f64, level: f64, beta1: f64| -> f64 {
        let first = classical(n_eff, beta0);
        let second = epsilon * epsilon * level * level;
        let third = classical(n_eff, beta1) * epsilon.powf(2.0 / (2.0 * beta1 + 1.0));
        first.max(second).max(third)
    };

    match regime {
        Regime::Structured => {
            let beta1 = check_finite("beta1", beta1)?;
            let m = check_finite("m", m)?;
            Ok(structured(nf, m.min(1.0), beta1))
        }
        Regime::StructuredAdaptEps => {
            let beta1 = check_finite("beta1", beta1)?;
            Ok(structured(nf, 1.0, beta1))
        }
        Regime::StructuredAdaptSmooth => {
            let beta1 = check_finite("beta1", beta1)?;
            let m = check_finite("m", m)?;
            Ok(structured(nf / log_n, m.min(1.0), beta1))
        }
        Regime::StructuredAdaptBoth => {
            let beta1 = check_finite("beta1", beta1)?;
            Ok(structured(nf / log_n, 1.0, beta1))
        }
        Regime::Arbitrary => {
            Ok(classical(nf, beta0).max(epsilon.powf(2.0 * beta0 / (beta0 + 1.0))))
        }
        Regime::ArbitraryAdaptOne => {
            Ok(classical(nf / log_n, beta0).max(epsilon.powf(2.0 * beta0 / (beta0 + 1.0))))
        }
    }
}

/// Splitmix-style mixing of the master seed with cell and replication
/// indices; gives independent, order-free per-replication streams.
pub fn derive_seed(master: u64, cell: u64, replication: u64) -> u64 {
    let mut z = master
        .wrapping_add(cell.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(replication.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Target density specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSpec {
    Gaussian { scale: f64 },
}

impl TargetSpec {
    fn build(&self) -> Result<SmoothDensity> {
        match *self {
            TargetSpec::Gaussian { scale } => gaussian_baseline(scale),
        }
    }
}

/// How wide an adversarial spike should be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpikeWidth {
    Fixed(f64),
    /// Track the estimator's oracle bandwidth cell by cell.
    MatchOracleBandwidth,
}

/// Contamination specification, resolved per sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContaminationSpec {
    None,
    Gaussian { scale: f64 },
    Spike { location: f64, width: SpikeWidth },
    PointMass { location: f64 },
}

/// Estimator under test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorSpec {
    /// Always returns the given value; for harness calibration tests.
    Constant(f64),
    FixedBandwidth { h: f64 },
    OraclePlain,
    OracleStructured,
    OracleArbitrary,
    /// Standard Lepski rule; `known_epsilon` switches the normalization
    /// from `1/n` to `1/(n(1-ε))`.
    LepskiStandard { known_epsilon: bool },
    LepskiEpsilonReference,
    LepskiReverse,
    LepskiReverseConservative { beta0_lower: f64 },
}

impl EstimatorSpec {
    pub fn name(&self) -> String {
        match self {
            EstimatorSpec::Constant(v) => format!("constant:{v}"),
            EstimatorSpec::FixedBandwidth { h } => format!("fixed:{h}"),
            EstimatorSpec::OraclePlain => "oracle-plain".into(),
            EstimatorSpec::OracleStructured => "oracle-structured".into(),
            EstimatorSpec::OracleArbitrary => "oracle-arbitrary".into(),
            EstimatorSpec::LepskiStandard { known_epsilon: true } => {
                "lepski-standard-known-eps".into()
            }
            EstimatorSpec::LepskiStandard { known_epsilon: false } => "lepski-standard".into(),
            EstimatorSpec::LepskiEpsilonReference => "lepski-eps-ref".into(),
            EstimatorSpec::LepskiReverse => "lepski-reverse".into(),
            EstimatorSpec::LepskiReverseConservative { beta0_lower } => {
                format!("lepski-reverse-cons:{beta0_lower}")
            }
        }
    }

    /// Bandwidth used by the oracle estimators; also the width a
    /// `MatchOracleBandwidth` spike resolves to.
    fn oracle_bandwidth(&self, n: usize, epsilon: f64, beta0: f64, beta1: f64) -> f64 {
        match self {
            EstimatorSpec::OracleStructured => {
                oracle_bandwidth_structured(n, epsilon, beta0, beta1)
            }
            EstimatorSpec::OracleArbitrary => oracle_bandwidth_arbitrary(n, epsilon, beta0),
            EstimatorSpec::FixedBandwidth { h } => *h,
            _ => oracle_bandwidth_plain(n, beta0),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn apply(
        &self,
        points: &[f64],
        kernel: &Kernel,
        epsilon: f64,
        beta0: f64,
        beta1: f64,
        c1: f64,
    ) -> Result<(f64, Option<f64>)> {
        let n = points.len();
        match *self {
            EstimatorSpec::Constant(v) => Ok((v, None)),
            EstimatorSpec::FixedBandwidth { h } => {
                Ok((kde_at_zero(points, kernel, h, Normalization::Plain)?, None))
            }
            EstimatorSpec::OraclePlain => {
                let h = oracle_bandwidth_plain(n, beta0);
                Ok((kde_at_zero(points, kernel, h, Normalization::Plain)?, None))
            }
            EstimatorSpec::OracleStructured => {
                let h = oracle_bandwidth_structured(n, epsilon, beta0, beta1);
                let norm = Normalization::KnownEpsilon(epsilon);
                Ok((kde_at_zero(points, kernel, h, norm)?, None))
            }
            EstimatorSpec::OracleArbitrary => {
                let h = oracle_bandwidth_arbitrary(n, epsilon, beta0);
                Ok((kde_at_zero(points, kernel, h, Normalization::Plain)?, None))
            }
            EstimatorSpec::LepskiStandard { known_epsilon } => {
                let norm = if known_epsilon {
                    Normalization::KnownEpsilon(epsilon)
                } else {
                    Normalization::Plain
                };
                let cfg = LepskiConfig::for_sample_size(n, c1, norm);
                let sel = lepski_standard(points, kernel, &cfg)?;
                Ok((sel.estimate, Some(sel.h_hat)))
            }
            EstimatorSpec::LepskiEpsilonReference => {
                let cfg = LepskiConfig::for_sample_size(n, c1, Normalization::Plain);
                let sel = lepski_epsilon_reference(points, kernel, epsilon, &cfg)?;
                Ok((sel.estimate, Some(sel.h_hat)))
            }
            EstimatorSpec::LepskiReverse => {
                let cfg = LepskiConfig::for_sample_size(n, c1, Normalization::Plain);
                let sel = lepski_reverse(points, kernel, beta0, &cfg)?;
                Ok((sel.estimate, Some(sel.h_hat)))
            }
            EstimatorSpec::LepskiReverseConservative { beta0_lower } => {
                let cfg = LepskiConfig::for_sample_size(n, c1, Normalization::Plain);
                let sel = lepski_reverse_conservative(points, kernel, beta0_lower, &cfg)?;
                Ok((sel.estimate, Some(sel.h_hat)))
            }
        }
    }
}

impl std::str::FromStr for EstimatorSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(v) = s.strip_prefix("constant:") {
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("bad constant estimator '{s}'")))?;
            return Ok(EstimatorSpec::Constant(v));
        }
        if let Some(h) = s.strip_prefix("fixed:") {
            let h: f64 = h
                .parse()
                .map_err(|_| Error::Config(format!("bad fixed estimator '{s}'")))?;
            return Ok(EstimatorSpec::FixedBandwidth { h });
        }
        if let Some(b) = s.strip_prefix("lepski-reverse-cons:") {
            let b: f64 = b
                .parse()
                .map_err(|_| Error::Config(format!("bad conservative bound in '{s}'")))?;
            return Ok(EstimatorSpec::LepskiReverseConservative { beta0_lower: b });
        }
        match s {
            "oracle-plain" => Ok(EstimatorSpec::OraclePlain),
            "oracle-structured" => Ok(EstimatorSpec::OracleStructured),
            "oracle-arbitrary" => Ok(EstimatorSpec::OracleArbitrary),
            "lepski-standard" => Ok(EstimatorSpec::LepskiStandard { known_epsilon: false }),
            "lepski-standard-known-eps" => Ok(EstimatorSpec::LepskiStandard { known_epsilon: true }),
            "lepski-eps-ref" => Ok(EstimatorSpec::LepskiEpsilonReference),
            "lepski-reverse" => Ok(EstimatorSpec::LepskiReverse),
            other => Err(Error::Config(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Full experiment description; `rate_sweep` is a pure function of this
/// plus nothing else.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub contamination: ContaminationSpec,
    /// Contamination proportion for n-axis sweeps.
    pub epsilon: f64,
    /// Declared contamination level (enters the CSV and theory column).
    pub m: f64,
    pub estimator: EstimatorSpec,
    pub regime: Regime,
    pub beta0: f64,
    pub beta1: f64,
    /// Lepski threshold constant; `None` uses `4 √(‖K‖∞ ∫K²)`.
    pub c1: Option<f64>,
    pub kernel_order: usize,
    pub n_grid: Vec<usize>,
    pub epsilon_grid: Option<Vec<f64>>,
    pub replications: usize,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            target: TargetSpec::Gaussian { scale: 1.0 },
            contamination: ContaminationSpec::None,
            epsilon: 0.0,
            m: f64::INFINITY,
            estimator: EstimatorSpec::OraclePlain,
            regime: Regime::Structured,
            beta0: 2.0,
            beta1: 2.0,
            c1: None,
            // large default order covers all smoothness used in experiments
            kernel_order: 6,
            n_grid: vec![512, 1024, 2048, 4096, 8192, 16384],
            epsilon_grid: None,
            replications: 200,
            master_seed: 0,
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    /// Apply one `key = value` setting; unknown keys are config errors.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("invalid {what}: '{value}'"));
        match key {
            "estimator" => self.estimator = value.parse()?,
            "regime" => self.regime = value.parse()?,
            "target_scale" => {
                let scale: f64 = value.parse().map_err(|_| bad("target_scale"))?;
                self.target = TargetSpec::Gaussian { scale };
            }
            "contamination" => self.contamination = parse_contamination(value)?,
            "epsilon" => self.epsilon = value.parse().map_err(|_| bad("epsilon"))?,
            "m" => {
                self.m = if value == "inf" {
                    f64::INFINITY
                } else {
                    value.parse().map_err(|_| bad("m"))?
                }
            }
            "beta0" => self.beta0 = value.parse().map_err(|_| bad("beta0"))?,
            "beta1" => self.beta1 = value.parse().map_err(|_| bad("beta1"))?,
            "c1" => self.c1 = Some(value.parse().map_err(|_| bad("c1"))?),
            "kernel_order" => self.kernel_order = value.parse().map_err(|_| bad("kernel_order"))?,
            "n_grid" => {
                self.n_grid = value
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|_| bad("n_grid")))
                    .collect::<Result<_>>()?
            }
            "epsilon_grid" => {
                self.epsilon_grid = Some(
                    value
                        .split(',')
                        .map(|t| t.trim().parse::<f64>().map_err(|_| bad("epsilon_grid")))
                        .collect::<Result<_>>()?,
                )
            }
            "replications" => {
                self.replications = value.parse().map_err(|_| bad("replications"))?
            }
            "master_seed" => self.master_seed = value.parse().map_err(|_| bad("master_seed"))?,
            "output_path" => self.output_path = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parse a `key = value` config file body.
    pub fn apply_config_str(&mut self, body: &str) -> Result<()> {
        for (lineno, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must be nonempty".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if let Some(eg) = &self.epsilon_grid {
            if eg.is_empty() {
                return Err(Error::Config("epsilon_grid must be nonempty".into()));
            }
            if self.n_grid.len() != 1 {
                return Err(Error::Config(
                    "epsilon sweeps need exactly one sample size in n_grid".into(),
                ));
            }
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be positive".into()));
        }
        Ok(())
    }
}

fn parse_contamination(value: &str) -> Result<ContaminationSpec> {
    let bad = || Error::Config(format!("invalid contamination spec '{value}'"));
    if value == "none" {
        return Ok(ContaminationSpec::None);
    }
    if let Some(rest) = value.strip_prefix("gaussian:") {
        let scale: f64 = rest.trim().parse().map_err(|_| bad())?;
        return Ok(ContaminationSpec::Gaussian { scale });
    }
    if let Some(rest) = value.strip_prefix("pointmass:") {
        let location: f64 = rest.trim().parse().map_err(|_| bad())?;
        return Ok(ContaminationSpec::PointMass { location });
    }
    if let Some(rest) = value.strip_prefix("spike:") {
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(bad());
        }
        let location: f64 = parts[0].parse().map_err(|_| bad())?;
        let width = if parts[1] == "match" {
            SpikeWidth::MatchOracleBandwidth
        } else {
            SpikeWidth::Fixed(parts[1].parse().map_err(|_| bad())?)
        };
        return Ok(ContaminationSpec::Spike { location, width });
    }
    Err(bad())
}

/// One sweep cell with its risk estimate.
#[derive(Debug, Clone)]
pub struct CellRecord {
    pub n: usize,
    pub epsilon: f64,
    pub mse: f64,
    pub stderr: f64,
    pub replications: usize,
    pub mean_h_hat: Option<f64>,
    pub theory: f64,
    pub seed: u64,
}

/// Least-squares slope of `log(mse)` against `log(x)` with its standard
/// error.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
}

/// Sweep output: per-cell records, the fitted exponent along the sweep
/// axis (when defined), and the exact CSV body that was or would be
/// written.
#[derive(Debug, Clone)]
pub struct RiskReport {
    pub cells: Vec<CellRecord>,
    pub slope: Option<SlopeFit>,
    pub csv: String,
}

/// Fit `log(mse) = a + slope · log(x)` by least squares.
pub fn fit_rate_exponent(cells: &[(f64, f64)]) -> Result<SlopeFit> {
    if cells.len() < 3 {
        return Err(Error::InvalidParameter(
            "rate fit needs at least 3 cells".into(),
        ));
    }
    for &(x, y) in cells {
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rate fit needs positive values, got ({x}, {y})"
            )));
        }
    }
    let k = cells.len() as f64;
    let xs: Vec<f64> = cells.iter().map(|c| c.0.ln()).collect();
    let ys: Vec<f64> = cells.iter().map(|c| c.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / k;
    let ym = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let variance = rss / (k - 2.0);
    Ok(SlopeFit {
        slope,
        stderr: (variance / sxx).sqrt(),
    })
}

fn contamination_for_cell(
    cfg: &ExperimentConfig,
    n: usize,
    epsilon: f64,
) -> Result<Contamination> {
    Ok(match cfg.contamination {
        ContaminationSpec::None => Contamination::None,
        ContaminationSpec::Gaussian { scale } => Contamination::Structured {
            density: gaussian_baseline(scale)?,
            level: None,
        },
        ContaminationSpec::PointMass { location } => {
            Contamination::Arbitrary(ArbitrarySampler::PointMass { location })
        }
        ContaminationSpec::Spike { location, width } => {
            let scale = match width {
                SpikeWidth::Fixed(s) => s,
                SpikeWidth::MatchOracleBandwidth => {
                    cfg.estimator
                        .oracle_bandwidth(n, epsilon, cfg.beta0, cfg.beta1)
                }
            };
            Contamination::Arbitrary(adversarial_spike(scale, location)?)
        }
    })
}

/// Monte Carlo risk of the configured estimator at one `(n, ε)` cell.
///
/// The cell index feeds the seed derivation so that every cell of a sweep
/// has its own replication streams.
pub fn monte_carlo_risk(cfg: &ExperimentConfig, cell_index: usize, n: usize, epsilon: f64) -> Result<CellRecord> {
    let target = cfg.target.build()?;
    let f_at_zero = target.evaluate(0.0);
    let contamination = contamination_for_cell(cfg, n, epsilon)?;
    let model = ContaminatedModel::new(epsilon, target, contamination)?;
    let kernel = make_order_kernel(cfg.kernel_order);
    let c1 = cfg.c1.unwrap_or_else(|| LepskiConfig::default_c1(&kernel));

    let mut squared_errors = Vec::with_capacity(cfg.replications);
    let mut h_hat_sum = 0.0;
    let mut h_hat_count = 0usize;
    for rep in 0..cfg.replications {
        let seed = derive_seed(cfg.master_seed, cell_index as u64, rep as u64);
        let sample = sample_mixture(&model, n, seed)?;
        let (estimate, h_hat) = cfg.estimator.apply(
            &sample.points,
            &kernel,
            epsilon,
            cfg.beta0,
            cfg.beta1,
            c1,
        )?;
        let err = estimate - f_at_zero;
        squared_errors.push(err * err);
        if let Some(h) = h_hat {
            h_hat_sum += h;
            h_hat_count += 1;
        }
    }

    let reps = squared_errors.len() as f64;
    let mse = squared_errors.iter().sum::<f64>() / reps;
    let stderr = if squared_errors.len() > 1 {
        let var = squared_errors
            .iter()
            .map(|&s| (s - mse) * (s - mse))
            .sum::<f64>()
            / (reps - 1.0);
        (var / reps).sqrt()
    } else {
        0.0
    };
    let theory = theory_rate(cfg.regime, n, epsilon, cfg.beta0, cfg.beta1, cfg.m)?;
    Ok(CellRecord {
        n,
        epsilon,
        mse,
        stderr,
        replications: cfg.replications,
        mean_h_hat: (h_hat_count > 0).then(|| h_hat_sum / h_hat_count as f64),
        theory,
        seed: cfg.master_seed,
    })
}

struct CsvFloat(f64);

impl fmt::Display for CsvFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn report_csv(cfg: &ExperimentConfig, cells: &[CellRecord], c1: f64) -> String {
    let mut out = String::from(
        "regime,estimator,n,epsilon,beta0,beta1,m,c1,kernel_order,mse,stderr,mean_h_hat,theory_rate,seed\n",
    );
    for cell in cells {
        let mean_h = cell
            .mean_h_hat
            .map_or_else(|| "NA".to_string(), |h| format!("{h}"));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            cfg.regime.name(),
            cfg.estimator.name(),
            cell.n,
            CsvFloat(cell.epsilon),
            CsvFloat(cfg.beta0),
            CsvFloat(cfg.beta1),
            CsvFloat(cfg.m),
            CsvFloat(c1),
            cfg.kernel_order,
            CsvFloat(cell.mse),
            CsvFloat(cell.stderr),
            mean_h,
            CsvFloat(cell.theory),
            cell.seed,
        ));
    }
    out
}

/// Run the configured sweep: one cell per grid point along the designated
/// axis (`n` by default, `ε` when `epsilon_grid` is set), an exponent fit
/// along that axis, and CSV emission.
pub fn rate_sweep(cfg: &ExperimentConfig) -> Result<RiskReport> {
    cfg.validate()?;
    let kernel = make_order_kernel(cfg.kernel_order);
    let c1 = cfg.c1.unwrap_or_else(|| LepskiConfig::default_c1(&kernel));

    let cells: Vec<(usize, f64)> = match &cfg.epsilon_grid {
        Some(eg) => eg.iter().map(|&e| (cfg.n_grid[0], e)).collect(),
        None => cfg.n_grid.iter().map(|&n| (n, cfg.epsilon)).collect(),
    };

    let mut records = Vec::with_capacity(cells.len());
    for (cell_index, &(n, epsilon)) in cells.iter().enumerate() {
        records.push(monte_carlo_risk(cfg, cell_index, n, epsilon)?);
    }

    let axis: Vec<(f64, f64)> = match &cfg.epsilon_grid {
        Some(_) => records.iter().map(|c| (c.epsilon, c.mse)).collect(),
        None => records.iter().map(|c| (c.n as f64, c.mse)).collect(),
    };
    let slope = if axis.len() >= 3 && axis.iter().all(|&(x, y)| x > 0.0 && y > 0.0) {
        Some(fit_rate_exponent(&axis)?)
    } else {
        None
    };

    let csv = report_csv(cfg, &records, c1);
    if let Some(path) = &cfg.output_path {
        std::fs::write(path, &csv)?;
    }
    Ok(RiskReport {
        cells: records,
        slope,
        csv,
    })
}
