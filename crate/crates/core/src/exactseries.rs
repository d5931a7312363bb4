//! Exact coverage of Gaussian-perturbed lattices by quadrature of the
//! infinite-lattice series.
//!
//! Every quantity depends on a site `n` only through the noncentrality
//! `lambda = |n|^2 / sigma^2` of the squared modulus `Y_n = |n/sigma +
//! xi|^2 ~ chi^2_d(lambda)`, so sites are grouped by lattice shell. The
//! coverage probability at threshold theta is
//!
//! `p_c = sum_n int_0^inf prod_{j != n} F_j(t) f(t; lambda_n) dt`
//!
//! with `f` the noncentral chi-square density (radial density of the
//! perturbed site, in units of sigma^2 on squared moduli) and
//! `F_j(t) = int_t^inf (1 + theta t^kappa / u^kappa)^{-1} f(u; lambda_j) du`
//! the joint "site j is farther than t and its fading factor" integral,
//! `kappa = d beta / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{zeta_tail_integral, Lattice};
use crate::numerics::quad;
use crate::numerics::special::{
    gamma_fn, log_bessel_i0, sphere_surface,
};
use crate::sinr::{CoverageCurve, SinrParams};

/// Tolerances and truncation radii for the exact-series quadratures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Lattice shells beyond this radius enter only through the
    /// analytic interference tail correction.
    pub lattice_truncation_radius: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-6,
            rel_tol: 1e-6,
            max_subdivisions: 2000,
            lattice_truncation_radius: 30.0,
        }
    }
}

/// Parameters of the radial density of one perturbed site.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RadialDensityParams {
    /// Modulus of the unperturbed lattice site.
    pub n_modulus: f64,
    pub sigma: f64,
    pub dim: usize,
}

/// Angular factor `I(u)` of the noncentral chi-square density,
/// `f(t; lambda) = e^{-lambda/2} t^{d/2-1} e^{-t/2} I(sqrt(lambda t))`:
/// closed forms in dimensions 2 and 3, angular quadrature otherwise.
pub fn spherical_i(u: f64, dim: usize) -> Result<f64> {
    match dim {
        2 => Ok(crate::numerics::special::bessel_i0(u) / 2.0),
        3 => Ok(if u.abs() < 1e-4 {
            (1.0 + u * u / 6.0) / (2.0 * std::f64::consts::PI).sqrt()
        } else {
            u.sinh() / (u * (2.0 * std::f64::consts::PI).sqrt())
        }),
        _ => spherical_i_angular(u, dim),
    }
}

/// `I(u)` by quadrature over the polar angle, valid for every `dim >= 2`;
/// the closed forms above are its special cases.
pub fn spherical_i_angular(u: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "the angular representation needs dim >= 2".into(),
        });
    }
    let d = dim as f64;
    let c = (2.0 * std::f64::consts::PI).powf(-d / 2.0) * sphere_surface(dim - 1) / 2.0;
    // Extract e^u so the integrand stays in [0, 1] for large u.
    let (val, _) = quad::integrate(
        |phi| (-u * (1.0 - phi.cos())).exp() * phi.sin().powf(d - 2.0),
        0.0,
        std::f64::consts::PI,
        1e-14,
        1e-12,
        200,
    )?;
    Ok(u.exp() * c * val)
}

/// `ln I(u)`, overflow-safe for large arguments.
pub fn log_spherical_i(u: f64, dim: usize) -> Result<f64> {
    match dim {
        2 => Ok(log_bessel_i0(u) - std::f64::consts::LN_2),
        3 => Ok(if u < 1e-4 {
            (u * u / 6.0).ln_1p() - 0.5 * (2.0 * std::f64::consts::PI).ln()
        } else {
            u + (-(-2.0 * u).exp_m1() / 2.0).ln() - u.ln()
                - 0.5 * (2.0 * std::f64::consts::PI).ln()
        }),
        _ => {
            let d = dim as f64;
            let c = (2.0 * std::f64::consts::PI).powf(-d / 2.0) * sphere_surface(dim - 1) / 2.0;
            let (val, _) = quad::integrate(
                |phi| (-u * (1.0 - phi.cos())).exp() * phi.sin().powf(d - 2.0),
                0.0,
                std::f64::consts::PI,
                1e-14,
                1e-12,
                200,
            )?;
            Ok(u + (c * val).ln())
        }
    }
}

/// `I(0) = 1 / (2^{d/2} Gamma(d/2))`.
pub fn spherical_i_zero(dim: usize) -> f64 {
    let d = dim as f64;
    1.0 / (2f64.powf(d / 2.0) * gamma_fn(d / 2.0))
}

/// Radial density of the squared modulus of a perturbed site, in units
/// of sigma^2: the noncentral chi-square density with `d` degrees of
/// freedom and noncentrality `lambda = (n_modulus / sigma)^2`.
pub fn f_density(t: f64, params: &RadialDensityParams) -> Result<f64> {
    if params.sigma <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: "must be positive".into(),
        });
    }
    if t < 0.0 {
        return Ok(0.0);
    }
    let lambda = (params.n_modulus / params.sigma).powi(2);
    Ok(log_f(t, lambda, params.dim)?.exp())
}

fn log_f(t: f64, lambda: f64, dim: usize) -> Result<f64> {
    if t <= 0.0 {
        // Only reached at the t = 0 endpoint in dimension 2 where the
        // power factor is exactly 1.
        return if dim == 2 {
            Ok(-lambda / 2.0 + log_spherical_i(0.0, dim)?)
        } else {
            Ok(f64::NEG_INFINITY)
        };
    }
    let d = dim as f64;
    Ok(-lambda / 2.0 - t / 2.0
        + (d / 2.0 - 1.0) * t.ln()
        + log_spherical_i((lambda * t).sqrt(), dim)?)
}

/// Support window of the chi^2_d(lambda) mass: mean +/- 10 sd plus a pad
/// covering the exponential tail at small lambda.
fn mass_window(lambda: f64, dim: usize) -> (f64, f64) {
    let d = dim as f64;
    let m = lambda + d;
    let sd = (2.0 * (d + 2.0 * lambda)).sqrt();
    ((m - 10.0 * sd).max(0.0), m + 10.0 * sd + 40.0)
}

/// `int_{max(lower, support)} (1 + a u^{-kappa})^{-1} f(u; lambda) du`
/// with `a = theta t^kappa` (coverage) or `s^kappa` (the C1 limit).
fn factor_integral(a: f64, kappa: f64, lambda: f64, dim: usize, lower: f64) -> Result<f64> {
    let (lo, hi) = mass_window(lambda, dim);
    let lo = lo.max(lower);
    if lo >= hi {
        return Ok(0.0);
    }
    let (val, _) = quad::integrate(
        |u| {
            let p = a * u.powf(-kappa);
            let g = if p.is_finite() { 1.0 / (1.0 + p) } else { 0.0 };
            if g == 0.0 {
                0.0
            } else {
                match log_f(u, lambda, dim) {
                    Ok(lf) => g * lf.exp(),
                    Err(_) => 0.0,
                }
            }
        },
        lo,
        hi,
        1e-13,
        1e-10,
        500,
    )?;
    Ok(val.max(0.0))
}

#[derive(Debug, Clone, Copy)]
struct Shell {
    lambda: f64,
    count: usize,
}

struct SeriesEngine {
    dim: usize,
    kappa: f64,
    /// sigma^{d beta}, the prefactor of the analytic tail correction.
    sigma_pow: f64,
    /// Shell 0 is always the origin site (lambda = 0, count 1).
    shells: Vec<Shell>,
    /// Indices of shells kept in the outer (serving-site) sum.
    outer: Vec<usize>,
    /// Interference zeta tail beyond the truncation radius.
    e_tail: f64,
    /// Full interference zeta E(d beta) (truncated sum plus tail), used
    /// to size the decay scale of outer integrands.
    e_full: f64,
    /// Bound on the probability mass of omitted serving candidates.
    omitted: f64,
}

enum OuterWeight {
    /// Serving-site sum of the coverage series.
    Coverage,
    /// `e^{-lambda/2} I(0)` weights of the interference-limited C1 sum.
    C1,
}

impl SeriesEngine {
    fn new(
        lat: &Lattice,
        sigma: f64,
        beta: f64,
        quad: &QuadratureSpec,
        weight: &OuterWeight,
    ) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: "the exact series needs sigma > 0".into(),
            });
        }
        if beta <= 1.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: "must exceed 1".into(),
            });
        }
        let dim = lat.dim;
        let d = dim as f64;
        let kappa = d * beta / 2.0;
        let r_lat = quad.lattice_truncation_radius;
        let mut shells = vec![Shell { lambda: 0.0, count: 1 }];
        for (r2, count) in lat.shell_counts(r_lat)? {
            shells.push(Shell {
                lambda: r2 / (sigma * sigma),
                count,
            });
        }
        let e_tail = zeta_tail_integral(lat, d * beta, r_lat)?;

        // Outer (serving-site) selection. A shell at noncentrality lambda
        // can serve only if Y_n <= Y_0, and Y_0 <= t_star except with
        // chi-square tail probability ~ eps; the radial Gaussian bound
        // P(Y_n <= t_star) <= exp(-(sqrt(lambda) - sqrt(t_star))^2 / 2)
        // controls what the truncation omits.
        let eps = quad.abs_tol.min(1e-4);
        let t_star = 2.0 * (1.0 / eps).ln() + 4.0 * d;
        let serve_bound = |lambda: f64| -> f64 {
            let x = lambda.sqrt() - t_star.sqrt();
            if x <= 0.0 {
                1.0
            } else {
                (-x * x / 2.0).exp()
            }
        };
        let shell_weight = |lambda: f64| -> f64 {
            match weight {
                OuterWeight::Coverage => serve_bound(lambda),
                OuterWeight::C1 => (-lambda / 2.0).exp(),
            }
        };
        let mut outer = Vec::new();
        let mut omitted = 0.0;
        for (i, sh) in shells.iter().enumerate() {
            let w = shell_weight(sh.lambda) * sh.count as f64;
            if i == 0 || w > eps / 100.0 {
                outer.push(i);
            } else {
                omitted += w;
            }
        }
        // Serving candidates beyond the lattice truncation radius.
        if matches!(weight, OuterWeight::Coverage) {
            let upper = sigma * (t_star.sqrt() + 20.0);
            if upper > r_lat {
                let surf = sphere_surface(dim);
                let (beyond, _) = quad::integrate(
                    |r| surf * r.powi(dim as i32 - 1) / lat.covolume * serve_bound((r / sigma).powi(2)),
                    r_lat,
                    upper,
                    1e-12,
                    1e-9,
                    200,
                )?;
                omitted += beyond.max(0.0);
            }
        } else {
            // C1 weights e^{-lambda/2} are astronomically small beyond
            // the truncation radius for any sigma of interest.
            omitted += (-(r_lat / sigma).powi(2) / 2.0).exp() * sphere_surface(dim)
                * r_lat.powi(dim as i32)
                / lat.covolume;
        }
        let e_full = shells
            .iter()
            .skip(1)
            .map(|sh| sh.count as f64 * (sh.lambda * sigma * sigma).powf(-kappa))
            .sum::<f64>()
            + e_tail;
        Ok(Self {
            dim,
            kappa,
            sigma_pow: sigma.powf(d * beta),
            shells,
            outer,
            e_tail,
            e_full,
            omitted,
        })
    }

    /// Outer integration breakpoints: the integrand decays at least as
    /// fast as `exp(-a_coeff x^kappa sigma^{d beta} E)`, so a single
    /// panel over the full chi-square support can miss a mass spike near
    /// zero at large theta. Geometric panels anchored at the decay scale
    /// keep the initial Gauss-Kronrod evaluations inside the mass.
    fn panels(&self, a_coeff: f64, x_max: f64) -> Vec<f64> {
        let scale = (1.0 / (a_coeff * self.sigma_pow * self.e_full)).powf(1.0 / self.kappa);
        let mut breaks = vec![0.0];
        let mut b = scale.min(x_max / 4.0).max(x_max * 1e-12);
        while b < x_max {
            breaks.push(b);
            b *= 4.0;
        }
        breaks.push(x_max);
        breaks
    }

    /// The grouped series integrand at outer variable `x`:
    /// `sum_outer count_n w_n(x) prod_{j != n} F_j`, with the product
    /// over truncated shells completed by the analytic tail factor
    /// `exp(-a sigma^{d beta} E_tail)`, `a = theta x^kappa` or `x^kappa`.
    fn integrand(&self, x: f64, a: f64, weight: &OuterWeight) -> Result<f64> {
        let lower = match weight {
            OuterWeight::Coverage => x,
            OuterWeight::C1 => 0.0,
        };
        let mut log_factors = Vec::with_capacity(self.shells.len());
        let mut finite_sum = -a * self.sigma_pow * self.e_tail;
        let mut zero_count = 0usize;
        for sh in &self.shells {
            let f = factor_integral(a, self.kappa, sh.lambda, self.dim, lower)?;
            if f > 0.0 {
                let lf = f.min(1.0).ln();
                finite_sum += sh.count as f64 * lf;
                log_factors.push(Some(lf));
            } else {
                zero_count += sh.count;
                log_factors.push(None);
            }
        }
        let mut total = 0.0;
        for &i in &self.outer {
            let sh = self.shells[i];
            let lw = match weight {
                OuterWeight::Coverage => log_f(x, sh.lambda, self.dim)?,
                OuterWeight::C1 => -sh.lambda / 2.0 + spherical_i_zero(self.dim).ln(),
            };
            if lw == f64::NEG_INFINITY {
                continue;
            }
            // Remove one factor of this shell from the full product.
            let log_term = match log_factors[i] {
                Some(lf) => {
                    if zero_count > 0 {
                        continue;
                    }
                    lw + finite_sum - lf
                }
                None => {
                    if zero_count > sh.count.min(1) || sh.count > 1 {
                        continue;
                    }
                    lw + finite_sum
                }
            };
            total += sh.count as f64 * log_term.exp();
        }
        Ok(total)
    }
}

/// Coverage probability of the perturbed lattice over the theta grid of
/// `params`, by deterministic quadrature of the exact series. The
/// returned `stderr` holds a deterministic error bound: omitted
/// serving-site mass plus outer quadrature error.
pub fn coverage_exact(
    lat: &Lattice,
    sigma: f64,
    params: &SinrParams,
    quad_spec: &QuadratureSpec,
) -> Result<CoverageCurve> {
    params.validate()?;
    if lat.dim != params.dim {
        return Err(Error::DimensionMismatch {
            kind: "lattice vs SINR parameters".into(),
            expected: params.dim,
            got: lat.dim,
        });
    }
    if params.noise_w != 0.0 {
        return Err(Error::InvalidParameter {
            name: "noise_w",
            reason: "the exact series covers the interference-limited (W = 0) case".into(),
        });
    }
    let engine = SeriesEngine::new(lat, sigma, params.beta, quad_spec, &OuterWeight::Coverage)?;
    // Outer integration range: the serving squared modulus cannot exceed
    // the mass window of any kept shell.
    let t_max = engine
        .outer
        .iter()
        .map(|&i| mass_window(engine.shells[i].lambda, engine.dim).1)
        .fold(0.0f64, f64::max);
    let mut estimate = Vec::with_capacity(params.theta_grid.len());
    let mut stderr = Vec::with_capacity(params.theta_grid.len());
    for &theta in &params.theta_grid {
        if theta == 0.0 {
            estimate.push(1.0);
            stderr.push(0.0);
            continue;
        }
        let result = std::cell::Cell::new(Ok(()));
        let breaks = engine.panels(theta, t_max);
        let mut val = 0.0;
        let mut err = 0.0;
        let n_panels = breaks.len() - 1;
        for w in breaks.windows(2) {
            let (v, e) = quad::integrate(
                |t| {
                    let a = theta * t.powf(engine.kappa);
                    match engine.integrand(t, a, &OuterWeight::Coverage) {
                        Ok(v) => v,
                        Err(e) => {
                            result.set(Err(e));
                            0.0
                        }
                    }
                },
                w[0],
                w[1],
                quad_spec.abs_tol / n_panels as f64,
                quad_spec.rel_tol,
                quad_spec.max_subdivisions,
            )?;
            val += v;
            err += e;
        }
        result.into_inner()?;
        estimate.push(val.clamp(0.0, 1.0));
        stderr.push(engine.omitted + err);
    }
    Ok(CoverageCurve {
        theta_grid: params.theta_grid.clone(),
        estimate,
        stderr,
        n_trials: 0,
        label: format!("exact:{}(sigma={sigma})", lat.name),
    })
}

/// Interference-limited constant `C1 = lim_{theta -> inf} theta^{1/beta} p_c(theta)`
/// by quadrature of its exact series.
pub fn c1_exact(lat: &Lattice, sigma: f64, beta: f64, quad_spec: &QuadratureSpec) -> Result<f64> {
    let engine = SeriesEngine::new(lat, sigma, beta, quad_spec, &OuterWeight::C1)?;
    let d = lat.dim as f64;
    let kappa = engine.kappa;
    let c1_integrand = |s: f64| -> Result<f64> {
        let a = s.powf(kappa);
        Ok(engine.integrand(s, a, &OuterWeight::C1)? * s.powf(d / 2.0 - 1.0))
    };
    // Decay scale of the integrand from the exponentiated interference
    // sum; extend until the integrand has demonstrably died off.
    let mut s_cut = (60.0 / (engine.sigma_pow * engine.e_full)).powf(1.0 / kappa);
    let peak = c1_integrand(s_cut / 8.0)?.max(c1_integrand(s_cut / 64.0)?);
    for _ in 0..10 {
        if c1_integrand(s_cut)? <= 1e-10 * peak.max(1e-300) {
            break;
        }
        s_cut *= 2.0;
    }
    let result = std::cell::Cell::new(Ok(()));
    let breaks = engine.panels(1.0, s_cut);
    let n_panels = breaks.len() - 1;
    let mut val = 0.0;
    for w in breaks.windows(2) {
        let (v, _) = quad::integrate(
            |s| match c1_integrand(s) {
                Ok(v) => v,
                Err(e) => {
                    result.set(Err(e));
                    0.0
                }
            },
            w[0],
            w[1],
            quad_spec.abs_tol / n_panels as f64,
            quad_spec.rel_tol,
            quad_spec.max_subdivisions,
        )?;
        val += v;
    }
    result.into_inner()?;
    Ok(val)
}
