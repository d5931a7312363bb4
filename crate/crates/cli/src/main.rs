//! `covnet`: configuration-driven front end over the numerical core.
//! Each subcommand reads a JSON experiment config, runs one experiment,
//! and writes CSV artifacts with JSON manifest sidecars.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use covnet_core::error::Error;
use covnet_core::exactseries::QuadratureSpec;
use covnet_core::io;
use covnet_core::lattice::{make_lattice, Lattice, LatticeKind};
use covnet_core::rng::RngStream;
use covnet_core::sampler::SamplerSpec;
use covnet_core::sinr::{self, CoverageCurve, SinrParams};
use covnet_core::spatialstats;
use covnet_core::tda::{self, FiltrationParams, PdMetric};

const EXIT_CONFIG: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "covnet",
    version,
    about = "Coverage, persistence, and spatial statistics of structured wireless networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one point configuration and write it as CSV.
    Sample(RunArgs),
    /// Monte Carlo SINR coverage curve.
    CoverageMc(RunArgs),
    /// Deterministic exact-series coverage curve (perturbed lattice).
    CoverageExact(RunArgs),
    /// Small-perturbation log-normal coverage approximation.
    CoverageApprox(RunArgs),
    /// Epstein zeta values for a list of lattices.
    Zeta(RunArgs),
    /// Persistence diagram of one sampled configuration.
    Ph(RunArgs),
    /// Persistence-diagram distance sweep over sigma.
    PdSweep(RunArgs),
    /// Nearest-neighbor distance distribution.
    Nnd(RunArgs),
    /// Large-sigma comparison against the Poisson process.
    PoissonLimit(RunArgs),
    /// Check a config file without running anything.
    Validate {
        /// Path to the JSON experiment config.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides `master_seed` from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap; overrides `threads` from the config file.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides `output_dir` from the config file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Experiment {
    Sample,
    CoverageMc,
    CoverageExact,
    CoverageApprox,
    Zeta,
    Ph,
    PdSweep,
    Nnd,
    PoissonLimit,
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).expect("enum serializes");
        write!(f, "{}", s.as_str().expect("string variant"))
    }
}

/// SINR parameters as they appear in config files; `theta_grid` falls
/// back to the default 41-point log grid plus theta = 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SinrConfig {
    dim: usize,
    beta: f64,
    #[serde(default = "one")]
    gain_a: f64,
    #[serde(default)]
    noise_w: f64,
    #[serde(default)]
    theta_grid: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl SinrConfig {
    fn to_params(&self) -> SinrParams {
        SinrParams {
            dim: self.dim,
            beta: self.beta,
            gain_a: self.gain_a,
            noise_w: self.noise_w,
            theta_grid: self
                .theta_grid
                .clone()
                .unwrap_or_else(sinr::default_theta_grid),
        }
    }
}

/// Persistence knobs as they appear in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TdaConfig {
    #[serde(default = "default_max_radius")]
    max_radius: f64,
    #[serde(default = "default_max_degree")]
    max_degree: usize,
    #[serde(default = "default_metrics")]
    metrics: Vec<PdMetric>,
}

fn default_max_radius() -> f64 {
    FiltrationParams::default().max_radius
}

fn default_max_degree() -> usize {
    FiltrationParams::default().max_degree
}

fn default_metrics() -> Vec<PdMetric> {
    vec![PdMetric::Tv, PdMetric::Nearest]
}

impl Default for TdaConfig {
    fn default() -> Self {
        Self {
            max_radius: default_max_radius(),
            max_degree: default_max_degree(),
            metrics: default_metrics(),
        }
    }
}

impl TdaConfig {
    fn filtration(&self) -> FiltrationParams {
        FiltrationParams {
            max_radius: self.max_radius,
            max_degree: self.max_degree,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    experiment: Experiment,
    #[serde(default)]
    process: Option<SamplerSpec>,
    #[serde(default)]
    sinr: Option<SinrConfig>,
    #[serde(default)]
    quad: Option<QuadratureSpec>,
    #[serde(default)]
    tda: Option<TdaConfig>,
    #[serde(default)]
    n_trials: Option<u64>,
    #[serde(default)]
    n_realizations: Option<usize>,
    #[serde(default)]
    n_samples: Option<usize>,
    #[serde(default)]
    master_seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    threads: Option<usize>,
    /// Sigma grid of `pd-sweep`.
    #[serde(default)]
    sigma_grid: Option<Vec<f64>>,
    /// Lattices evaluated by `zeta`.
    #[serde(default)]
    lattices: Option<Vec<LatticeKind>>,
    /// Zeta exponent.
    #[serde(default)]
    s: Option<f64>,
    /// NND histogram bin width.
    #[serde(default)]
    bin_width: Option<f64>,
    /// Relative tolerance of Epstein zeta sums.
    #[serde(default)]
    zeta_rel_tol: Option<f64>,
}

struct ConfigError(String);

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError(e.to_string())
    }
}

impl ExperimentConfig {
    fn require<'a, T>(&'a self, field: &str, value: &'a Option<T>) -> Result<&'a T, ConfigError> {
        value.as_ref().ok_or_else(|| {
            ConfigError(format!(
                "experiment `{}` requires config field `{field}`",
                self.experiment
            ))
        })
    }

    fn process(&self) -> Result<&SamplerSpec, ConfigError> {
        self.require("process", &self.process)
    }

    /// Lattice and sigma of a perturbed-lattice process.
    fn perturbed_lattice(&self) -> Result<(Lattice, f64, f64), ConfigError> {
        match self.process()? {
            SamplerSpec::PerturbedLattice {
                lattice,
                dim,
                sigma,
                window_radius,
                basis,
                ..
            } => {
                let lat = make_lattice(*lattice, *dim, basis.as_deref())?;
                Ok((lat, *sigma, *window_radius))
            }
            other => Err(ConfigError(format!(
                "experiment `{}` requires a perturbed-lattice process, got `{}`",
                self.experiment,
                other.label()
            ))),
        }
    }

    /// Validates everything checkable without running; returns derived
    /// quantities to report.
    fn check(&self) -> Result<Vec<String>, ConfigError> {
        let mut derived = Vec::new();
        if self.master_seed.is_none() {
            return Err(ConfigError(
                "missing `master_seed` (seeds are mandatory for reproducibility)".into(),
            ));
        }
        if let Some(p) = &self.process {
            p.validate()?;
            let d = p.dim();
            let r = p.window_radius();
            let n_expected = covnet_core::pointproc::ball_volume(d, r);
            derived.push(format!(
                "expected window point count (unit intensity): {n_expected:.1}"
            ));
        }
        let params = match &self.sinr {
            Some(s) => {
                let params = s.to_params();
                params.validate()?;
                Some(params)
            }
            None => None,
        };
        match self.experiment {
            Experiment::Sample | Experiment::Ph => {
                self.process()?;
            }
            Experiment::CoverageMc => {
                self.process()?;
                let params = self.require("sinr", &params)?;
                self.require("n_trials", &self.n_trials)?;
                if self.process()?.dim() != params.dim {
                    return Err(ConfigError(
                        "process and sinr dimensions disagree".into(),
                    ));
                }
                let theta_max = params
                    .theta_grid
                    .iter()
                    .cloned()
                    .fold(0.0f64, f64::max);
                let bound = sinr::truncation_error_bound(
                    theta_max,
                    0.5,
                    self.process()?.window_radius(),
                    params,
                );
                derived.push(format!(
                    "window truncation bound at theta_max, |X_B| = 0.5: {bound:.3e}"
                ));
            }
            Experiment::CoverageExact | Experiment::CoverageApprox => {
                self.perturbed_lattice()?;
                self.require("sinr", &params)?;
            }
            Experiment::Zeta => {
                self.require("lattices", &self.lattices)?;
                let s = *self.require("s", &self.s)?;
                for kind in self.lattices.as_ref().expect("checked") {
                    let lat = lattice_for_zeta(*kind)?;
                    if s <= lat.dim as f64 {
                        return Err(ConfigError(format!(
                            "zeta exponent s = {s} must exceed dim = {} for `{kind}`",
                            lat.dim
                        )));
                    }
                }
            }
            Experiment::PdSweep => {
                self.perturbed_lattice()?;
                self.require("sigma_grid", &self.sigma_grid)?;
                self.require("n_samples", &self.n_samples)?;
            }
            Experiment::Nnd => {
                self.process()?;
                self.require("n_realizations", &self.n_realizations)?;
            }
            Experiment::PoissonLimit => {
                self.perturbed_lattice()?;
                self.require("sinr", &params)?;
                self.require("n_trials", &self.n_trials)?;
                self.require("n_realizations", &self.n_realizations)?;
            }
        }
        Ok(derived)
    }
}

fn lattice_for_zeta(kind: LatticeKind) -> Result<Lattice, Error> {
    let dim = match kind {
        LatticeKind::Triangular | LatticeKind::Square => 2,
        _ => 3,
    };
    make_lattice(kind, dim, None)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceCap { .. } => EXIT_RESOURCE,
        Error::Numerical(_) | Error::Eigensolver { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    match code {
        EXIT_RESOURCE => {
            eprintln!("hint: reduce the window radius, truncation radius, or sample budget");
        }
        EXIT_NUMERICAL => {
            eprintln!("hint: loosen quadrature tolerances or reduce the theta range");
        }
        _ => {}
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Validate { config } => return run_validate(&config),
        Command::Sample(a) => (Experiment::Sample, a),
        Command::CoverageMc(a) => (Experiment::CoverageMc, a),
        Command::CoverageExact(a) => (Experiment::CoverageExact, a),
        Command::CoverageApprox(a) => (Experiment::CoverageApprox, a),
        Command::Zeta(a) => (Experiment::Zeta, a),
        Command::Ph(a) => (Experiment::Ph, a),
        Command::PdSweep(a) => (Experiment::PdSweep, a),
        Command::Nnd(a) => (Experiment::Nnd, a),
        Command::PoissonLimit(a) => (Experiment::PoissonLimit, a),
    };
    let mut config = match load_config(&args.config) {
        Ok(c) => c,
        Err(msg) => return fail(EXIT_CONFIG, &msg),
    };
    if config.experiment != experiment {
        return fail(
            EXIT_CONFIG,
            &format!(
                "config declares experiment `{}` but subcommand is `{experiment}`",
                config.experiment
            ),
        );
    }
    if let Some(seed) = args.seed {
        config.master_seed = Some(seed);
    }
    if let Some(threads) = args.threads {
        config.threads = Some(threads);
    }
    if let Some(out) = args.out {
        config.output_dir = Some(out);
    }
    if let Err(ConfigError(msg)) = config.check() {
        return fail(EXIT_CONFIG, &msg);
    }
    if let Some(threads) = config.threads {
        if threads > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
            {
                return fail(EXIT_CONFIG, &format!("thread pool: {e}"));
            }
        }
    }
    let out_dir = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail(EXIT_CONFIG, &format!("output_dir: {e}"));
    }
    let started = Instant::now();
    let result = match experiment {
        Experiment::Sample => run_sample(&config, &out_dir),
        Experiment::CoverageMc => run_coverage_mc(&config, &out_dir),
        Experiment::CoverageExact => run_coverage_exact(&config, &out_dir),
        Experiment::CoverageApprox => run_coverage_approx(&config, &out_dir),
        Experiment::Zeta => run_zeta(&config, &out_dir),
        Experiment::Ph => run_ph(&config, &out_dir),
        Experiment::PdSweep => run_pd_sweep(&config, &out_dir),
        Experiment::Nnd => run_nnd(&config, &out_dir),
        Experiment::PoissonLimit => run_poisson_limit(&config, &out_dir),
    };
    match result {
        Ok(outputs) => {
            let wall = started.elapsed().as_secs_f64();
            for csv in &outputs.csv_files {
                let manifest = manifest_json(&config, &outputs, wall);
                let sidecar = csv.with_extension("manifest.json");
                if let Err(e) = io::write_manifest(&sidecar, &manifest) {
                    return fail(exit_code(&e), &e.to_string());
                }
                println!("wrote {}", csv.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(exit_code(&e), &e.to_string()),
    }
}

struct Outputs {
    csv_files: Vec<PathBuf>,
    extra: serde_json::Value,
}

impl Outputs {
    fn csv(path: PathBuf) -> Self {
        Self {
            csv_files: vec![path],
            extra: serde_json::Value::Null,
        }
    }
}

fn manifest_json(
    config: &ExperimentConfig,
    outputs: &Outputs,
    wall_time_s: f64,
) -> serde_json::Value {
    serde_json::json!({
        "experiment": config.experiment.to_string(),
        "config": config,
        "seed": config.master_seed,
        "threads": config.threads,
        "code_version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": wall_time_s,
        "outputs": outputs.csv_files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "summary": outputs.extra,
    })
}

fn load_config(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_validate(path: &Path) -> ExitCode {
    let config = match load_config(path) {
        Ok(c) => c,
        Err(msg) => return fail(EXIT_CONFIG, &msg),
    };
    match config.check() {
        Ok(derived) => {
            println!("ok: config is valid (experiment `{}`)", config.experiment);
            for line in derived {
                println!("derived: {line}");
            }
            println!("errors: none");
            ExitCode::SUCCESS
        }
        Err(ConfigError(msg)) => fail(EXIT_CONFIG, &msg),
    }
}

fn seed_of(config: &ExperimentConfig) -> u64 {
    config.master_seed.expect("checked by validate")
}

fn run_sample(config: &ExperimentConfig, out: &Path) -> Result<Outputs, Error> {
    let spec = config.process.as_ref().expect("checked");
    let cfg = spec.sample(RngStream::new(seed_of(config), 0))?;
    let path = out.join("points.csv");
    io::write_points_csv(&path, &cfg)?;
    let mut outputs = Outputs::csv(path);
    outputs.extra = serde_json::json!({
        "sampler": cfg.provenance,
        "n_points": cfg.len(),
        "window_radius": cfg.window_radius,
        "intensity": cfg.intensity,
    });
    Ok(outputs)
}

fn curve_outputs(path: PathBuf, curve: &CoverageCurve) -> Outputs {
    let mut outputs = Outputs::csv(path);
    outputs.extra = serde_json::json!({
        "label": curve.label,
        "n_trials": curve.n_trials,
        "n_theta": curve.theta_grid.len(),
    });
    outputs
}

fn run_coverage_mc(config: &ExperimentConfig, out: &Path) -> Result<Outputs, Error> {
    let spec = config.process.as_ref().expect("checked");
    let params = config.sinr.as_ref().expect("checked").to_params();
    let n_trials = config.n_trials.expect("checked");
    let curve = sinr::coverage_mc(spec, &params, n_trials, RngStream::new(seed_of(config), 0))?;
    let path = out.join("coverage_mc.csv");
    io::write_curve_csv(&path, &curve)?;
    Ok(curve_outputs(path, &curve))
}

fn run_coverage_exact(config: &ExperimentConfig, out: &Path) -> Result<Outputs, Error> {
    let (lat, sigma, _) = config
        .perturbed_lattice()
        .map_err(|ConfigError(m)| Error::Numerical(m))?;
    let params = config.sinr.as_ref().expect("checked").to_params();
    let quad = config.quad.clone().unwrap_or_default();
    let curve = covnet_core::exactseries::coverage_exact(&lat, sigma, &params, &quad)?;
    let path = out.join("coverage_exact.csv");
    io::write_curve_csv(&path, &curve)?;
    Ok(curve_outputs(path, &curve))
}

fn run_coverage_approx(config: &ExperimentConfig, out: &Path) -> Result<Outputs, Error> {
    let (lat, sigma, _) = config
        .perturbed_lattice()
        .map_err(|ConfigError(m)| Error::Numerical(m))?;
    let params = config.sinr.as_ref().expect("checked").to_params();
    let estimate: Result<Vec<f64>, Error> = params
        .theta_grid
        .iter()
        .map(|&theta| {
            if theta == 0.0 {
                Ok(1.0)
            } else {
                covnet_core::asymptotics::coverage_smallsigma(&lat, theta, sigma, params.beta, 1e-9)
            }
        })
        .collect();
    let curve = CoverageCurve {
        theta_grid: params.theta_grid.clone(),
        estimate: estimate?,
        stderr: vec![0.0; params.theta_grid.len()],
        n_trials: 0,
        label: format!("smallsigma:{}:sigma={sigma}", lat.name),
    };
    let path = out.join("coverage_approx.csv");
    io::write_curve_csv(&path, &curve)?;
    Ok(curve_outputs(path, &curve))
}

fn run_zeta(config: &ExperimentConfig, out: &Path) -> Result<Outputs, Error> {
    let kinds = config.lattices.as_ref().expect("checked");
    let s = config.s.expect("checked");
    let path = out.join("zeta.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["lattice", "s", "value"])?;
    let mut values = serde_json::Map::new();
    for &kind in kinds {
        let lat = lattice_for_zeta(kind)?;
        let value =
            covnet_core::lattice::epstein_zeta(&lat, s, config.zeta_rel_tol.unwrap_or(1e-7))?;
        w.write_record([lat.name.clone(), format!("{s}"), format!("{value}")])?;
        values.insert(lat.name.clone(), serde_json::json!(value));
    }
    w.flush()?;
    let mut outputs = Outputs::csv(path);
    outputs.extra = serde_json::Value::Object(values);
    Ok(outputs)
}

fn run_ph(config: &ExperimentConfig, out: &Path) -> Result<Outputs, Error> {
    let spec = config.process.as_ref().expect("checked");
    let fp = config.tda.clone().unwrap_or_default().filtration();
    let cfg = spec.sample(RngStream::new(seed_of(config), 0))?;
    let diagrams = tda::rips_persistence(&cfg, &fp)?;
    let path = out.join("pd.csv");
    io::write_diagrams_csv(&path, &diagrams)?;
    let mut outputs = Outputs::csv(path);
    outputs.extra = serde_json::json!({
        "sampler": cfg.provenance,
        "n_points": cfg.len(),
        "pairs_per_degree": diagrams.iter().map(|d| d.pairs.len()).collect::<Vec<_>>(),
    });
    Ok(outputs)
}

fn run_pd_sweep(config: &ExperimentConfig, out: &Path) -> Result<Outputs, Error> {
    let (lat, _, window_radius) = config
        .perturbed_lattice()
        .map_err(|ConfigError(m)| Error::Numerical(m))?;
    let tda_cfg = config.tda.clone().unwrap_or_default();
    let sigma_grid = config.sigma_grid.as_ref().expect("checked");
    let n_samples = config.n_samples.expect("checked");
    let rows = tda::pd_distance_sweep(
        &lat,
        sigma_grid,
        n_samples,
        &tda_cfg.filtration(),
        &tda_cfg.metrics,
        window_radius,
        RngStream::new(seed_of(config), 0),
    )?;
    let mut outputs = Outputs {
        csv_files: Vec::new(),
        extra: serde_json::Value::Null,
    };
    let mut argmins = serde_json::Map::new();
    for metric in &tda_cfg.metrics {
        let subset: Vec<_> = rows
            .iter()
            .filter(|r| r.metric == metric.to_string())
            .cloned()
            .collect();
        let path = out.join(format!("sweep_{metric}.csv"));
        io::write_sweep_csv(&path, &subset)?;
        if let Some(best) = subset
            .iter()
            .min_by(|a, b| a.mean_distance.total_cmp(&b.mean_distance))
        {
            argmins.insert(metric.to_string(), serde_json::json!(best.sigma));
        }
        outputs.csv_files.push(path);
    }
    outputs.extra = serde_json::json!({ "argmin_sigma": argmins });
    Ok(outputs)
}

fn run_nnd(config: &ExperimentConfig, out: &Path) -> Result<Outputs, Error> {
    let spec = config.process.as_ref().expect("checked");
    let n_realizations = config.n_realizations.expect("checked");
    let bin_width = config.bin_width.unwrap_or(0.05);
    let est = spatialstats::nnd_estimate(
        spec,
        n_realizations,
        bin_width,
        RngStream::new(seed_of(config), 0),
    )?;
    let path = out.join("nnd.csv");
    io::write_nnd_csv(&path, &est)?;
    let mut outputs = Outputs::csv(path);
    outputs.extra = serde_json::json!({
        "label": est.label,
        "n_points_used": est.n_points_used,
        "ks_vs_poisson": spatialstats::ks_to_cdf(&est, spatialstats::poisson_nnd_cdf(spec.dim())),
    });
    Ok(outputs)
}

fn run_poisson_limit(config: &ExperimentConfig, out: &Path) -> Result<Outputs, Error> {
    let spec = config.process.as_ref().expect("checked");
    let params = config.sinr.as_ref().expect("checked").to_params();
    let n_trials = config.n_trials.expect("checked");
    let n_realizations = config.n_realizations.expect("checked");
    let bin_width = config.bin_width.unwrap_or(0.05);
    let seed = seed_of(config);
    let poisson = SamplerSpec::Poisson {
        dim: spec.dim(),
        window_radius: spec.window_radius(),
    };
    let ptl_curve = sinr::coverage_mc(spec, &params, n_trials, RngStream::new(seed, 0))?;
    let poisson_curve = sinr::coverage_mc(&poisson, &params, n_trials, RngStream::new(seed, 1))?;
    let path = out.join("poisson_limit.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "theta",
        "ptl_estimate",
        "ptl_stderr",
        "poisson_estimate",
        "poisson_stderr",
    ])?;
    let mut sup_gap = 0.0f64;
    for i in 0..params.theta_grid.len() {
        sup_gap = sup_gap.max((ptl_curve.estimate[i] - poisson_curve.estimate[i]).abs());
        w.write_record(
            [
                params.theta_grid[i],
                ptl_curve.estimate[i],
                ptl_curve.stderr[i],
                poisson_curve.estimate[i],
                poisson_curve.stderr[i],
            ]
            .map(|v| format!("{v}")),
        )?;
    }
    w.flush()?;
    let est = spatialstats::nnd_estimate(spec, n_realizations, bin_width, RngStream::new(seed, 2))?;
    let nnd_path = out.join("poisson_limit_nnd.csv");
    io::write_nnd_csv(&nnd_path, &est)?;
    let ks = spatialstats::ks_to_cdf(&est, spatialstats::poisson_nnd_cdf(spec.dim()));
    Ok(Outputs {
        csv_files: vec![path, nnd_path],
        extra: serde_json::json!({
            "coverage_sup_gap": sup_gap,
            "nnd_ks_vs_poisson": ks,
        }),
    })
}
