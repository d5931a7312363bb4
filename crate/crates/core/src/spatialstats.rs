//! Nearest-neighbor distance (NND) summaries with minus-sampling edge
//! correction, plus Kolmogorov-Smirnov distances between estimates and
//! against reference distributions.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointproc::PointConfiguration;
use crate::rng::RngStream;
use crate::sampler::SamplerSpec;

/// Pooled nearest-neighbor distance estimate across realizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NndEstimate {
    /// Histogram bin edges (uniform width, starting at 0).
    pub bin_edges: Vec<f64>,
    /// Histogram density, normalized to integrate to 1.
    pub density: Vec<f64>,
    /// Sorted pooled distances.
    pub ecdf_support: Vec<f64>,
    /// Empirical CDF value at each support point ((i + 1) / n).
    pub ecdf_values: Vec<f64>,
    /// Total distances pooled after edge correction.
    pub n_points_used: usize,
    pub label: String,
}

/// Nearest-neighbor distance of every point in `cfg`, edge-corrected by
/// minus-sampling: a point contributes only when its distance to the
/// window boundary exceeds its nearest-neighbor distance, so the true
/// nearest neighbor cannot lie outside the window.
pub fn nn_distances(cfg: &PointConfiguration) -> Result<Vec<f64>> {
    if cfg.len() < 2 {
        return Err(Error::EmptyConfiguration);
    }
    let d = cfg.dim;
    let cell = 0.75 * cfg.intensity.powf(-1.0 / d as f64);
    let key = |p: &[f64]| -> Vec<i64> {
        p.iter().map(|&x| (x / cell).floor() as i64).collect()
    };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for i in 0..cfg.len() {
        grid.entry(key(cfg.point(i))).or_default().push(i);
    }
    let dist2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };
    let mut out = Vec::with_capacity(cfg.len());
    let mut cursor: Vec<i64> = vec![0; d];
    for i in 0..cfg.len() {
        let p = cfg.point(i);
        let home = key(p);
        let mut best2 = f64::INFINITY;
        let mut k: i64 = 1;
        loop {
            // Scan the full Chebyshev box of radius k around the home
            // cell; any point in a cell outside that box is at distance
            // at least k * cell, so once best <= k * cell we are done.
            cursor.fill(-k);
            'box_scan: loop {
                let probe: Vec<i64> = home.iter().zip(&cursor).map(|(h, c)| h + c).collect();
                if let Some(bucket) = grid.get(&probe) {
                    for &j in bucket {
                        if j != i {
                            best2 = best2.min(dist2(p, cfg.point(j)));
                        }
                    }
                }
                let mut axis = 0;
                loop {
                    if axis == d {
                        break 'box_scan;
                    }
                    cursor[axis] += 1;
                    if cursor[axis] <= k {
                        break;
                    }
                    cursor[axis] = -k;
                    axis += 1;
                }
            }
            if best2.sqrt() <= k as f64 * cell {
                break;
            }
            k += 1;
        }
        out.push(best2.sqrt());
    }
    Ok(out)
}

/// Pools minus-sampled nearest-neighbor distances over independent
/// realizations of `spec` and returns histogram plus empirical CDF.
/// Realization `t` uses `stream.substream(t)`, so results do not depend
/// on the thread count.
pub fn nnd_estimate(
    spec: &SamplerSpec,
    n_realizations: usize,
    bin_width: f64,
    stream: RngStream,
) -> Result<NndEstimate> {
    if n_realizations == 0 {
        return Err(Error::InvalidParameter {
            name: "n_realizations",
            reason: "must be positive".into(),
        });
    }
    if bin_width <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "bin_width",
            reason: "must be positive".into(),
        });
    }
    spec.validate()?;
    let per_trial: Result<Vec<Vec<f64>>> = (0..n_realizations)
        .into_par_iter()
        .map(|t| {
            let cfg = spec.sample(stream.substream(t as u64))?;
            let radius = cfg.window_radius;
            let dists = nn_distances(&cfg)?;
            Ok((0..cfg.len())
                .zip(&dists)
                .filter(|&(i, &d_nn)| {
                    let r = cfg.point(i).iter().map(|x| x * x).sum::<f64>().sqrt();
                    radius - r > d_nn
                })
                .map(|(_, &d_nn)| d_nn)
                .collect())
        })
        .collect();
    let mut pooled: Vec<f64> = per_trial?.into_iter().flatten().collect();
    if pooled.is_empty() {
        return Err(Error::Numerical(
            "no nearest-neighbor distances survived edge correction".into(),
        ));
    }
    pooled.sort_by(f64::total_cmp);
    let n = pooled.len();
    let max = *pooled.last().expect("nonempty");
    let n_bins = ((max / bin_width).floor() as usize + 1).max(1);
    let mut counts = vec![0usize; n_bins];
    for &x in &pooled {
        let b = ((x / bin_width) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let density: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (n as f64 * bin_width))
        .collect();
    let bin_edges: Vec<f64> = (0..=n_bins).map(|b| b as f64 * bin_width).collect();
    let ecdf_values: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / n as f64).collect();
    Ok(NndEstimate {
        bin_edges,
        density,
        ecdf_support: pooled,
        ecdf_values,
        n_points_used: n,
        label: spec.label(),
    })
}

/// Two-sample Kolmogorov-Smirnov statistic between the empirical CDFs of
/// two estimates.
pub fn ks_distance(a: &NndEstimate, b: &NndEstimate) -> f64 {
    let (xa, xb) = (&a.ecdf_support, &b.ecdf_support);
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup: f64 = 0.0;
    while i < na || j < nb {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => break,
        };
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    sup
}

/// Kolmogorov-Smirnov statistic between an estimate and an analytic CDF.
pub fn ks_to_cdf<F: Fn(f64) -> f64>(a: &NndEstimate, cdf: F) -> f64 {
    let n = a.ecdf_support.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in a.ecdf_support.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - (i + 1) as f64 / n).abs());
        sup = sup.max((f - i as f64 / n).abs());
    }
    sup
}

/// Nearest-neighbor distance CDF of the unit-intensity Poisson process
/// in dimension `dim`: 1 - exp(-v_d r^d) with v_d the unit-ball volume.
pub fn poisson_nnd_cdf(dim: usize) -> impl Fn(f64) -> f64 {
    let v = crate::numerics::special::unit_ball_volume(dim);
    move |r: f64| {
        if r <= 0.0 {
            0.0
        } else {
            -(-v * r.powi(dim as i32)).exp_m1()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeKind;
    use approx::assert_abs_diff_eq;

    fn ptl_spec(kind: LatticeKind, dim: usize, sigma: f64, radius: f64) -> SamplerSpec {
        SamplerSpec::PerturbedLattice {
            lattice: kind,
            dim,
            sigma,
            window_radius: radius,
            apply_uniform_shift: true,
            basis: None,
        }
    }

    #[test]
    fn nn_distances_brute_force_agreement() {
        let spec = SamplerSpec::Poisson {
            dim: 2,
            window_radius: 8.0,
        };
        let cfg = spec.sample(RngStream::new(50, 0)).unwrap();
        let fast = nn_distances(&cfg).unwrap();
        for i in 0..cfg.len() {
            let brute = (0..cfg.len())
                .filter(|&j| j != i)
                .map(|j| {
                    cfg.point(i)
                        .iter()
                        .zip(cfg.point(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(fast[i], brute, epsilon = 1e-12);
        }
    }

    #[test]
    fn bare_triangular_lattice_is_a_point_mass() {
        // sigma = 0: every nearest-neighbor distance equals the lattice
        // shortest vector, (2/sqrt(3))^(1/2) = 1.07457 at unit intensity.
        let est = nnd_estimate(
            &ptl_spec(LatticeKind::Triangular, 2, 0.0, 12.0),
            3,
            0.05,
            RngStream::new(51, 0),
        )
        .unwrap();
        let expected = (2.0 / 3f64.sqrt()).sqrt();
        assert_abs_diff_eq!(expected, 1.07457, epsilon = 1e-5);
        for &x in &est.ecdf_support {
            assert_abs_diff_eq!(x, expected, epsilon = 1e-9);
        }
        let nonzero: Vec<usize> = est
            .density
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert!(est.bin_edges[nonzero[0]] <= expected && expected < est.bin_edges[nonzero[0] + 1]);
    }

    #[test]
    fn poisson_nnd_matches_rayleigh_cdf() {
        let est = nnd_estimate(
            &SamplerSpec::Poisson {
                dim: 2,
                window_radius: 15.0,
            },
            40,
            0.05,
            RngStream::new(52, 0),
        )
        .unwrap();
        let ks = ks_to_cdf(&est, poisson_nnd_cdf(2));
        assert!(est.n_points_used > 10_000);
        assert!(ks < 0.02, "ks = {ks}, n = {}", est.n_points_used);
    }

    #[test]
    fn density_integrates_to_one() {
        let est = nnd_estimate(
            &SamplerSpec::Poisson {
                dim: 2,
                window_radius: 10.0,
            },
            5,
            0.05,
            RngStream::new(53, 0),
        )
        .unwrap();
        let mass: f64 = est.density.iter().sum::<f64>() * 0.05;
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn ks_distance_to_poisson_increases_as_sigma_shrinks() {
        let poisson = nnd_estimate(
            &SamplerSpec::Poisson {
                dim: 2,
                window_radius: 12.0,
            },
            30,
            0.05,
            RngStream::new(54, 0),
        )
        .unwrap();
        let ks_at = |sigma: f64| {
            let est = nnd_estimate(
                &ptl_spec(LatticeKind::Triangular, 2, sigma, 12.0),
                30,
                0.05,
                RngStream::new(54, 1),
            )
            .unwrap();
            ks_distance(&est, &poisson)
        };
        let (k02, k08, k30) = (ks_at(0.2), ks_at(0.8), ks_at(3.0));
        assert!(k02 > k08 && k08 > k30, "{k02} {k08} {k30}");
        assert!(k30 < 0.05, "sigma = 3 should be near Poisson, ks = {k30}");
    }

    #[test]
    fn ginibre_repels_at_short_range() {
        // Repulsion: the Ginibre NND density must sit well below Poisson
        // at short range.
        let gin = nnd_estimate(
            &SamplerSpec::Ginibre {
                n_eigen: 250,
                delta_edge: 0.15,
            },
            20,
            0.05,
            RngStream::new(55, 0),
        )
        .unwrap();
        let cdf = poisson_nnd_cdf(2);
        let gin_cdf_at = |r: f64| {
            let k = gin.ecdf_support.partition_point(|&x| x <= r);
            k as f64 / gin.ecdf_support.len() as f64
        };
        assert!(gin_cdf_at(0.2) < 0.5 * cdf(0.2));
    }

    #[test]
    fn cubic_lattice_3d_is_poisson_like_at_large_sigma() {
        let est = nnd_estimate(
            &ptl_spec(LatticeKind::Cubic, 3, 0.5, 6.0),
            40,
            0.05,
            RngStream::new(56, 0),
        )
        .unwrap();
        let ks = ks_to_cdf(&est, poisson_nnd_cdf(3));
        assert!(ks < 0.02, "ks = {ks}");
    }

    #[test]
    fn fcc_lattice_3d_keeps_structure_at_moderate_sigma() {
        let fcc = nnd_estimate(
            &ptl_spec(LatticeKind::Fcc, 3, 0.2, 6.0),
            40,
            0.05,
            RngStream::new(57, 0),
        )
        .unwrap();
        let ks = ks_to_cdf(&fcc, poisson_nnd_cdf(3));
        assert!(ks > 0.1, "sigma = 0.2 should stay far from Poisson, ks = {ks}");
        // Density peaks near the FCC nearest-neighbor spacing at unit
        // intensity, 2^(1/6)/sqrt(2) = 0.7937.
        let peak_bin = fcc
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let peak = 0.05 * (peak_bin as f64 + 0.5);
        let spacing = 2f64.powf(1.0 / 6.0) / 2f64.sqrt();
        assert!((peak - spacing).abs() < 0.1, "peak {peak} vs {spacing}");
    }
}
