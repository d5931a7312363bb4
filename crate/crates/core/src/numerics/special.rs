//! Special functions used by the coverage formulas: modified Bessel I0,
//! sphere areas, and a Kolmogorov tail for the KS tests.

use statrs::function::gamma::{gamma, ln_gamma};

/// Modified Bessel function of the first kind, order zero.
///
/// Power series for moderate arguments, asymptotic expansion beyond. The
/// split at 40 keeps both branches at full f64 accuracy.
pub fn bessel_i0(x: f64) -> f64 {
    let z = x.abs();
    if z <= 40.0 {
        i0_series(z)
    } else {
        log_bessel_i0(z).exp()
    }
}

/// log I0(x), safe for large arguments where I0 itself overflows.
pub fn log_bessel_i0(x: f64) -> f64 {
    let z = x.abs();
    if z <= 40.0 {
        i0_series(z).ln()
    } else {
        // I0(z) ~ e^z / sqrt(2 pi z) * sum_k a_k / z^k
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12u32 {
            let kk = k as f64;
            term *= (2.0 * kk - 1.0) * (2.0 * kk - 1.0) / (8.0 * kk * z);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        z - 0.5 * (2.0 * std::f64::consts::PI * z).ln() + sum.ln()
    }
}

fn i0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Surface area of the unit sphere S^{d-1} in R^d.
pub fn sphere_surface(dim: usize) -> f64 {
    let d = dim as f64;
    2.0 * std::f64::consts::PI.powf(0.5 * d) / gamma(0.5 * d)
}

/// Volume of the unit ball in R^d.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let d = dim as f64;
    std::f64::consts::PI.powf(0.5 * d) / gamma(0.5 * d + 1.0)
}

pub use statrs::function::gamma::gamma as gamma_fn;

pub fn ln_gamma_fn(x: f64) -> f64 {
    ln_gamma(x)
}

/// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
///
/// Used as the asymptotic p-value of the two-sample KS statistic.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..101u32 {
        let t = 2.0 * (k as f64).powi(2) * lambda * lambda;
        let term = (-t).exp();
        if term < 1e-18 {
            break;
        }
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
