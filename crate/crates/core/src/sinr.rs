//! SINR coverage: the Rayleigh-fading coverage functional on a fixed
//! configuration, Monte Carlo coverage curves, and the Poisson
//! closed-form benchmark.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad;
use crate::numerics::special::sphere_surface;
use crate::pointproc::PointConfiguration;
use crate::rng::RngStream;
use crate::sampler::SamplerSpec;

/// Propagation and threshold parameters for the coverage functional.
///
/// Path loss is `l(r) = gain_a * r^{-d beta}` with `beta > 1`; `noise_w`
/// is the additive noise power W (0 gives the pure-SIR functional).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SinrParams {
    pub dim: usize,
    pub beta: f64,
    pub gain_a: f64,
    pub noise_w: f64,
    pub theta_grid: Vec<f64>,
}

impl SinrParams {
    pub fn new(dim: usize, beta: f64) -> Self {
        Self {
            dim,
            beta,
            gain_a: 1.0,
            noise_w: 0.0,
            theta_grid: default_theta_grid(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "must be at least 1".into(),
            });
        }
        if self.beta <= 1.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: "must exceed 1 for summable interference".into(),
            });
        }
        if self.gain_a <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "gain_a",
                reason: "must be positive".into(),
            });
        }
        if self.noise_w < 0.0 {
            return Err(Error::InvalidParameter {
                name: "noise_w",
                reason: "must be nonnegative".into(),
            });
        }
        if self.theta_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameter {
                name: "theta_grid",
                reason: "entries must be finite and nonnegative".into(),
            });
        }
        Ok(())
    }

    /// Path-loss exponent on the squared distance, kappa = d beta / 2.
    pub fn kappa(&self) -> f64 {
        self.dim as f64 * self.beta / 2.0
    }
}

/// Default threshold grid: theta = 0 plus 41 log-spaced points in
/// [1e-2, 1e2].
pub fn default_theta_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let n = 41;
    for i in 0..n {
        let t = -2.0 + 4.0 * i as f64 / (n - 1) as f64;
        grid.push(10f64.powf(t));
    }
    grid
}

/// A coverage curve over a threshold grid, with per-point uncertainty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageCurve {
    pub theta_grid: Vec<f64>,
    pub estimate: Vec<f64>,
    /// Monte Carlo standard error, or a deterministic error bound for
    /// quadrature-based curves.
    pub stderr: Vec<f64>,
    pub n_trials: u64,
    pub label: String,
}

/// The serving base of the typical user at the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NearestBase {
    pub index: usize,
    pub location: Vec<f64>,
    pub modulus: f64,
}

/// Nearest point to the origin; ties resolve to the lowest index.
pub fn nearest_base(cfg: &PointConfiguration) -> Result<NearestBase> {
    if cfg.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let mut best = 0usize;
    let mut best_n2 = f64::INFINITY;
    for (i, p) in cfg.iter().enumerate() {
        let n2: f64 = p.iter().map(|x| x * x).sum();
        if n2 < best_n2 {
            best_n2 = n2;
            best = i;
        }
    }
    Ok(NearestBase {
        index: best,
        location: cfg.point(best).to_vec(),
        modulus: best_n2.sqrt(),
    })
}

/// Squared-distance ratios (|X_B|^2 / |X_j|^2)^kappa for all j != base,
/// the per-configuration precomputation shared by every theta.
fn interference_weights(cfg: &PointConfiguration, base: &NearestBase, kappa: f64) -> Vec<f64> {
    let b2 = base.modulus * base.modulus;
    let int_kappa = if (kappa - kappa.round()).abs() < 1e-12 {
        Some(kappa.round() as i32)
    } else {
        None
    };
    let mut out = Vec::with_capacity(cfg.len().saturating_sub(1));
    for (j, p) in cfg.iter().enumerate() {
        if j == base.index {
            continue;
        }
        let r2: f64 = p.iter().map(|x| x * x).sum();
        let ratio = b2 / r2;
        out.push(match int_kappa {
            Some(k) => ratio.powi(k),
            None => ratio.powf(kappa),
        });
    }
    out
}

fn coverage_from_weights(weights: &[f64], noise_exponent: f64, theta: f64) -> f64 {
    let mut log_p = -theta * noise_exponent;
    for z in weights {
        log_p -= (theta * z).ln_1p();
    }
    log_p.exp()
}

/// Coverage functional of a fixed configuration with the fading averaged
/// out: `exp(-theta W / l(|X_B|)) prod_{j != B} 1/(1 + theta (|X_B|/|X_j|)^{d beta})`.
pub fn coverage_function(
    cfg: &PointConfiguration,
    base: &NearestBase,
    theta: f64,
    params: &SinrParams,
) -> Result<f64> {
    params.validate()?;
    if cfg.dim != params.dim {
        return Err(Error::DimensionMismatch {
            kind: "configuration vs SINR parameters".into(),
            expected: params.dim,
            got: cfg.dim,
        });
    }
    let weights = interference_weights(cfg, base, params.kappa());
    Ok(coverage_from_weights(
        &weights,
        noise_exponent(base.modulus, params),
        theta,
    ))
}

fn noise_exponent(base_modulus: f64, params: &SinrParams) -> f64 {
    if params.noise_w == 0.0 {
        0.0
    } else {
        params.noise_w * base_modulus.powf(params.dim as f64 * params.beta) / params.gain_a
    }
}

/// Monte Carlo coverage curve: `n_trials` i.i.d. configurations from
/// `sampler`, with common random numbers across the whole theta grid
/// (one configuration serves every threshold).
pub fn coverage_mc(
    sampler: &SamplerSpec,
    params: &SinrParams,
    n_trials: u64,
    stream: RngStream,
) -> Result<CoverageCurve> {
    params.validate()?;
    if n_trials == 0 {
        return Err(Error::InvalidParameter {
            name: "n_trials",
            reason: "must be at least 1".into(),
        });
    }
    if sampler.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            kind: "sampler vs SINR parameters".into(),
            expected: params.dim,
            got: sampler.dim(),
        });
    }
    let kappa = params.kappa();
    let grid = &params.theta_grid;
    // Trials map to fixed substreams, so results do not depend on the
    // rayon thread count or schedule.
    let per_trial: Result<Vec<Vec<f64>>> = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let cfg = sampler.sample(stream.substream(trial))?;
            let base = nearest_base(&cfg)?;
            let weights = interference_weights(&cfg, &base, kappa);
            let ne = noise_exponent(base.modulus, params);
            Ok(grid
                .iter()
                .map(|&theta| coverage_from_weights(&weights, ne, theta))
                .collect())
        })
        .collect();
    let per_trial = per_trial?;
    let mut estimate = vec![0.0; grid.len()];
    let mut m2 = vec![0.0; grid.len()];
    for (k, row) in per_trial.iter().enumerate() {
        let n = (k + 1) as f64;
        for (i, &v) in row.iter().enumerate() {
            let delta = v - estimate[i];
            estimate[i] += delta / n;
            m2[i] += delta * (v - estimate[i]);
        }
    }
    let n = n_trials as f64;
    let stderr: Vec<f64> = m2
        .iter()
        .map(|&s| if n > 1.0 { (s / (n - 1.0) / n).sqrt() } else { f64::NAN })
        .collect();
    Ok(CoverageCurve {
        theta_grid: grid.clone(),
        estimate,
        stderr,
        n_trials,
        label: format!("mc:{}", sampler.label()),
    })
}

/// Interference power sum of a configuration beyond radius `r` from the
/// origin: `sum_{|x| > r} |x|^{-d beta}`.
pub fn tail_sum(cfg: &PointConfiguration, r: f64, params: &SinrParams) -> f64 {
    let e = params.dim as f64 * params.beta;
    cfg.iter()
        .map(|p| p.iter().map(|x| x * x).sum::<f64>())
        .filter(|&n2| n2 > r * r)
        .map(|n2| n2.powf(-e / 2.0))
        .sum()
}

/// Deterministic bound on the coverage bias from truncating interference
/// at radius R: `1 - exp(-theta |X_B|^{d beta} S(R))` with
/// `S(R) = surf_d R^{d - d beta} / (d beta - d)` the unit-intensity
/// interference tail integral.
pub fn truncation_error_bound(
    theta: f64,
    base_modulus: f64,
    window_radius: f64,
    params: &SinrParams,
) -> f64 {
    let d = params.dim as f64;
    let e = d * params.beta;
    let tail = sphere_surface(params.dim) * window_radius.powf(d - e) / (e - d);
    -(-theta * base_modulus.powf(e) * tail).exp_m1()
}

/// Closed-form SIR coverage of the unit-intensity Poisson network in
/// dimension 2 with beta = 2:
/// `1 / (1 + sqrt(theta) (pi/2 - atan(1/sqrt(theta))))`.
pub fn poisson_coverage_sir_2d_beta2(theta: f64) -> f64 {
    if theta == 0.0 {
        return 1.0;
    }
    let s = theta.sqrt();
    1.0 / (1.0 + s * (std::f64::consts::FRAC_PI_2 - (1.0 / s).atan()))
}

/// SIR coverage of the unit-intensity Poisson network for general
/// dimension and beta > 1, by quadrature of the interference factor:
/// `1/(1 + rho)` with `rho = d int_0^1 theta u^{d beta - d - 1} / (1 + theta u^{d beta}) du`.
pub fn poisson_coverage_sir(theta: f64, dim: usize, beta: f64) -> Result<f64> {
    if theta == 0.0 {
        return Ok(1.0);
    }
    let d = dim as f64;
    let e = d * beta;
    let (rho, _) = quad::integrate(
        |u| d * theta * u.powf(e - d - 1.0) / (1.0 + theta * u.powf(e)),
        0.0,
        1.0,
        1e-12,
        1e-12,
        200,
    )?;
    Ok(1.0 / (1.0 + rho))
}
