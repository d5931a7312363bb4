//! Vietoris-Rips persistent homology (degrees 0 and 1) and the two
//! persistence-diagram distances used for point-process comparison.
//!
//! Filtration convention: the filtration parameter is the ball radius
//! epsilon, so a simplex enters at (max pairwise distance)/2 — balls of
//! radius epsilon intersect pairwise iff centers are within 2 epsilon.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::pointproc::PointConfiguration;
use crate::rng::RngStream;
use crate::sampler::SamplerSpec;

/// Cap on the total simplex count of one flag complex.
const SIMPLEX_CAP: usize = 4_000_000;

/// Rips filtration parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FiltrationParams {
    /// Ball-radius cap of the filtration.
    pub max_radius: f64,
    /// Highest homology degree computed (simplices up to degree + 1).
    pub max_degree: usize,
}

impl Default for FiltrationParams {
    fn default() -> Self {
        Self {
            max_radius: 1.5,
            max_degree: 1,
        }
    }
}

/// A persistence diagram in one homology degree; deaths can be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub degree: usize,
    /// (birth, death) in ball-radius units, sorted by (birth, death).
    pub pairs: Vec<(f64, f64)>,
    pub source: String,
}

impl PersistenceDiagram {
    /// Finite pairs with persistence at least `cut`.
    pub fn finite_pairs(&self, cut: f64) -> Vec<(f64, f64)> {
        self.pairs
            .iter()
            .filter(|(b, d)| d.is_finite() && d - b >= cut)
            .copied()
            .collect()
    }
}

#[derive(Clone, Copy)]
struct Simplex {
    value: f64,
    dim: u8,
    verts: [u32; 3],
}

/// Persistence diagrams of the Rips flag filtration, one per degree in
/// `0..=fp.max_degree`, by boundary-matrix reduction over Z/2 with
/// simplices ordered by (filtration value, dimension, lexicographic).
/// Classes still alive at `max_radius` are reported with infinite death.
pub fn rips_persistence(
    cfg: &PointConfiguration,
    fp: &FiltrationParams,
) -> Result<Vec<PersistenceDiagram>> {
    if cfg.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    if fp.max_radius <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "max_radius",
            reason: "must be positive".into(),
        });
    }
    if fp.max_degree > 1 {
        return Err(Error::InvalidParameter {
            name: "max_degree",
            reason: "only degrees 0 and 1 are supported".into(),
        });
    }
    let n = cfg.len();
    let dist = |i: usize, j: usize| -> f64 {
        cfg.point(i)
            .iter()
            .zip(cfg.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let cap_dist = 2.0 * fp.max_radius;

    // Neighbor lists (j > i within the cap) define edges and, via sorted
    // intersection, triangles.
    let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut simplices: Vec<Simplex> = Vec::with_capacity(4 * n);
    for v in 0..n {
        simplices.push(Simplex {
            value: 0.0,
            dim: 0,
            verts: [v as u32, 0, 0],
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist(i, j);
            if d <= cap_dist {
                nbrs[i].push(j as u32);
                simplices.push(Simplex {
                    value: d / 2.0,
                    dim: 1,
                    verts: [i as u32, j as u32, 0],
                });
            }
        }
        if simplices.len() > SIMPLEX_CAP {
            return Err(Error::ResourceCap {
                what: "rips simplices",
                needed: simplices.len(),
                cap: SIMPLEX_CAP,
            });
        }
    }
    if fp.max_degree >= 1 {
        for i in 0..n {
            for (a, &j) in nbrs[i].iter().enumerate() {
                // Sorted intersection of nbrs[i] (beyond j) and nbrs[j].
                let rest = &nbrs[i][a + 1..];
                let other = &nbrs[j as usize];
                let (mut p, mut q) = (0, 0);
                while p < rest.len() && q < other.len() {
                    match rest[p].cmp(&other[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            let k = rest[p];
                            let value = dist(i, j as usize)
                                .max(dist(i, k as usize))
                                .max(dist(j as usize, k as usize))
                                / 2.0;
                            simplices.push(Simplex {
                                value,
                                dim: 2,
                                verts: [i as u32, j, k],
                            });
                            p += 1;
                            q += 1;
                        }
                    }
                }
            }
            if simplices.len() > SIMPLEX_CAP {
                return Err(Error::ResourceCap {
                    what: "rips simplices",
                    needed: simplices.len(),
                    cap: SIMPLEX_CAP,
                });
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.dim.cmp(&b.dim))
            .then(a.verts.cmp(&b.verts))
    });

    // Row indices: vertices by id, edges through a pair lookup.
    let mut vertex_row = vec![0usize; n];
    let mut edge_row: HashMap<(u32, u32), usize> = HashMap::new();
    for (idx, s) in simplices.iter().enumerate() {
        match s.dim {
            0 => vertex_row[s.verts[0] as usize] = idx,
            1 => {
                edge_row.insert((s.verts[0], s.verts[1]), idx);
            }
            _ => {}
        }
    }
    let boundary = |s: &Simplex| -> Vec<usize> {
        let mut rows = match s.dim {
            0 => vec![],
            1 => vec![
                vertex_row[s.verts[0] as usize],
                vertex_row[s.verts[1] as usize],
            ],
            _ => vec![
                edge_row[&(s.verts[0], s.verts[1])],
                edge_row[&(s.verts[0], s.verts[2])],
                edge_row[&(s.verts[1], s.verts[2])],
            ],
        };
        rows.sort_unstable();
        rows
    };

    let m = simplices.len();
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut pivot_of_row: Vec<usize> = vec![usize::MAX; m];
    let mut paired = vec![false; m];
    let mut diagrams: Vec<PersistenceDiagram> = (0..=fp.max_degree)
        .map(|degree| PersistenceDiagram {
            degree,
            pairs: Vec::new(),
            source: cfg.provenance.clone(),
        })
        .collect();
    for j in 0..m {
        let mut col = boundary(&simplices[j]);
        while let Some(&low) = col.last() {
            let k = pivot_of_row[low];
            if k == usize::MAX {
                break;
            }
            col = xor_sorted(&col, &reduced[k]);
        }
        if let Some(&low) = col.last() {
            pivot_of_row[low] = j;
            paired[low] = true;
            paired[j] = true;
            let (birth, death) = (simplices[low].value, simplices[j].value);
            let degree = simplices[low].dim as usize;
            if death > birth && degree <= fp.max_degree {
                diagrams[degree].pairs.push((birth, death));
            }
        }
        reduced.push(col);
    }
    for j in 0..m {
        if !paired[j] && reduced[j].is_empty() {
            let degree = simplices[j].dim as usize;
            if degree <= fp.max_degree {
                diagrams[degree].pairs.push((simplices[j].value, f64::INFINITY));
            }
        }
    }
    for d in &mut diagrams {
        d.pairs
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    Ok(diagrams)
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut p, mut q) = (0, 0);
    while p < a.len() && q < b.len() {
        match a[p].cmp(&b[q]) {
            std::cmp::Ordering::Less => {
                out.push(a[p]);
                p += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[q]);
                q += 1;
            }
            std::cmp::Ordering::Equal => {
                p += 1;
                q += 1;
            }
        }
    }
    out.extend_from_slice(&a[p..]);
    out.extend_from_slice(&b[q..]);
    out
}

/// Smoothed total-variation distance between diagrams: atoms nearer the
/// diagonal than `diagonal_cut` (and infinite pairs) are dropped, the
/// rest normalized to probability measures, convolved with an isotropic
/// Gaussian of standard deviation `kernel_sd`, and `int |f - g|`
/// evaluated as a Riemann sum on a shared grid (no 1/2 factor).
pub fn pd_smooth_tv(
    pd1: &PersistenceDiagram,
    pd2: &PersistenceDiagram,
    kernel_sd: f64,
    diagonal_cut: f64,
    grid_step: f64,
) -> Result<f64> {
    if kernel_sd <= 0.0 || grid_step <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "kernel_sd/grid_step",
            reason: "must be positive".into(),
        });
    }
    let a = pd1.finite_pairs(diagonal_cut);
    let b = pd2.finite_pairs(diagonal_cut);
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => return Err(Error::EmptyDiagram),
        _ => {}
    }
    let pad = 4.0 * kernel_sd;
    let all = a.iter().chain(b.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(bx, by) in all {
        x0 = x0.min(bx);
        x1 = x1.max(bx);
        y0 = y0.min(by);
        y1 = y1.max(by);
    }
    let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
    let nx = ((x1 - x0) / grid_step).ceil() as usize + 1;
    let ny = ((y1 - y0) / grid_step).ceil() as usize + 1;
    let norm_a = 1.0 / (a.len() as f64 * 2.0 * std::f64::consts::PI * kernel_sd * kernel_sd);
    let norm_b = 1.0 / (b.len() as f64 * 2.0 * std::f64::consts::PI * kernel_sd * kernel_sd);
    let inv2s2 = 1.0 / (2.0 * kernel_sd * kernel_sd);
    let mut total = 0.0;
    for ix in 0..nx {
        let x = x0 + ix as f64 * grid_step;
        for iy in 0..ny {
            let y = y0 + iy as f64 * grid_step;
            let mut f = 0.0;
            for &(bx, by) in &a {
                f += (-((x - bx).powi(2) + (y - by).powi(2)) * inv2s2).exp();
            }
            let mut g = 0.0;
            for &(bx, by) in &b {
                g += (-((x - bx).powi(2) + (y - by).powi(2)) * inv2s2).exp();
            }
            total += (f * norm_a - g * norm_b).abs();
        }
    }
    Ok(total * grid_step * grid_step)
}

/// Symmetrized nearest-point diagram distance
/// `D(X,Y) = sum_{x in X} d(x, Y) + sum_{y in Y} d(y, X)` with the
/// Euclidean metric on (birth, death); infinite pairs are excluded.
pub fn pd_nearest_point_distance(
    pd1: &PersistenceDiagram,
    pd2: &PersistenceDiagram,
) -> Result<f64> {
    let a = pd1.finite_pairs(0.0);
    let b = pd2.finite_pairs(0.0);
    if a.is_empty() || b.is_empty() {
        if a.is_empty() && b.is_empty() {
            return Ok(0.0);
        }
        return Err(Error::EmptyDiagram);
    }
    let one_sided = |from: &[(f64, f64)], to: &[(f64, f64)]| -> f64 {
        from.iter()
            .map(|&(x, y)| {
                to.iter()
                    .map(|&(u, v)| ((x - u).powi(2) + (y - v).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    };
    Ok(one_sided(&a, &b) + one_sided(&b, &a))
}

/// Diagram-distance metric selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdMetric {
    Tv,
    Nearest,
}

impl std::fmt::Display for PdMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PdMetric::Tv => write!(f, "tv"),
            PdMetric::Nearest => write!(f, "nearest"),
        }
    }
}

/// Smoothing defaults of the TV distance.
pub const TV_KERNEL_SD: f64 = 0.5;
pub const TV_DIAGONAL_CUT: f64 = 0.05;
pub const TV_GRID_STEP: f64 = 0.02;

/// One row of a PD-distance sweep table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub mean_distance: f64,
    pub stderr: f64,
    pub metric: String,
    pub n_samples: usize,
}

/// Sweeps sigma, comparing degree-1 diagrams of the perturbed lattice
/// against Ginibre at matched intensity and window. Ginibre draws use
/// common random numbers across the sigma grid (substream = sample
/// index), so each sigma is compared against the same reference set.
pub fn pd_distance_sweep(
    lat: &Lattice,
    sigma_grid: &[f64],
    n_samples: usize,
    fp: &FiltrationParams,
    metrics: &[PdMetric],
    window_radius: f64,
    stream: RngStream,
) -> Result<Vec<SweepRow>> {
    if sigma_grid.is_empty() || metrics.is_empty() || n_samples == 0 {
        return Err(Error::InvalidParameter {
            name: "sigma_grid/metrics/n_samples",
            reason: "must be nonempty/positive".into(),
        });
    }
    let delta = crate::pointproc::GINIBRE_EDGE_TRIM;
    let n_eigen = (std::f64::consts::PI * (window_radius / (1.0 - delta)).powi(2)).ceil() as usize;
    let ginibre = SamplerSpec::Ginibre {
        n_eigen,
        delta_edge: delta,
    };
    let h1 = |cfg: &PointConfiguration| -> Result<PersistenceDiagram> {
        let mut diagrams = rips_persistence(cfg, fp)?;
        Ok(diagrams.remove(1))
    };
    let reference: Result<Vec<PersistenceDiagram>> = (0..n_samples)
        .into_par_iter()
        .map(|s| h1(&ginibre.sample(stream.substream(s as u64))?))
        .collect();
    let reference = reference?;
    let mut rows = Vec::new();
    for (si, &sigma) in sigma_grid.iter().enumerate() {
        let ptl = SamplerSpec::PerturbedLattice {
            lattice: crate::lattice::LatticeKind::Custom,
            dim: lat.dim,
            sigma,
            window_radius,
            apply_uniform_shift: false,
            basis: Some(lat.basis.clone()),
        };
        let sample_distances: Result<Vec<Vec<f64>>> = (0..n_samples)
            .into_par_iter()
            .map(|s| {
                let sub = ((si + 1) * n_samples + s) as u64;
                let diagram = h1(&ptl.sample(stream.substream(sub))?)?;
                metrics
                    .iter()
                    .map(|m| match m {
                        PdMetric::Tv => pd_smooth_tv(
                            &diagram,
                            &reference[s],
                            TV_KERNEL_SD,
                            TV_DIAGONAL_CUT,
                            TV_GRID_STEP,
                        ),
                        PdMetric::Nearest => {
                            pd_nearest_point_distance(&diagram, &reference[s])
                        }
                    })
                    .collect()
            })
            .collect();
        let sample_distances = sample_distances?;
        for (mi, metric) in metrics.iter().enumerate() {
            let vals: Vec<f64> = sample_distances.iter().map(|row| row[mi]).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            rows.push(SweepRow {
                sigma,
                mean_distance: mean,
                stderr: (var / n).sqrt(),
                metric: metric.to_string(),
                n_samples,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn cfg_from(points: &[[f64; 2]]) -> PointConfiguration {
        PointConfiguration {
            dim: 2,
            points: points.iter().flatten().copied().collect(),
            window_radius: 100.0,
            intensity: 1.0,
            provenance: "test".into(),
        }
    }

    #[test]
    fn single_point() {
        let d = rips_persistence(&cfg_from(&[[0.0, 0.0]]), &FiltrationParams::default()).unwrap();
        assert_eq!(d[0].pairs, vec![(0.0, f64::INFINITY)]);
        assert!(d[1].pairs.is_empty());
    }

    #[test]
    fn two_points_merge_at_half_distance() {
        let d = rips_persistence(
            &cfg_from(&[[0.0, 0.0], [2.0, 0.0]]),
            &FiltrationParams {
                max_radius: 3.0,
                max_degree: 1,
            },
        )
        .unwrap();
        assert_eq!(d[0].pairs, vec![(0.0, 1.0), (0.0, f64::INFINITY)]);
        assert!(d[1].pairs.is_empty());
    }

    #[test]
    fn unit_square_h1_bar() {
        let d = rips_persistence(
            &cfg_from(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
            &FiltrationParams {
                max_radius: 2.0,
                max_degree: 1,
            },
        )
        .unwrap();
        assert_eq!(d[1].pairs.len(), 1);
        let (b, death) = d[1].pairs[0];
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(death, 2f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn deaths_beyond_cap_are_infinite() {
        // Square with the cap below the diagonal half-length: the cycle
        // never dies inside the filtration.
        let d = rips_persistence(
            &cfg_from(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
            &FiltrationParams {
                max_radius: 0.6,
                max_degree: 1,
            },
        )
        .unwrap();
        assert_eq!(d[1].pairs, vec![(0.5, f64::INFINITY)]);
    }

    // Independent brute-force reduction: enumerate every <= 3-subset,
    // build the dense Z/2 boundary matrix, and reduce with no pivot
    // bookkeeping shortcuts.
    fn brute_force(points: &[[f64; 2]], fp: &FiltrationParams) -> Vec<Vec<(f64, f64)>> {
        let n = points.len();
        let dist = |i: usize, j: usize| -> f64 {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            (dx * dx + dy * dy).sqrt()
        };
        let mut simplices: Vec<(f64, Vec<usize>)> = Vec::new();
        for i in 0..n {
            simplices.push((0.0, vec![i]));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let v = dist(i, j) / 2.0;
                if v <= fp.max_radius {
                    simplices.push((v, vec![i, j]));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let v = dist(i, j).max(dist(i, k)).max(dist(j, k)) / 2.0;
                    if v <= fp.max_radius {
                        simplices.push((v, vec![i, j, k]));
                    }
                }
            }
        }
        simplices.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.len().cmp(&b.1.len()))
                .then(a.1.cmp(&b.1))
        });
        let m = simplices.len();
        let mut matrix: Vec<Vec<bool>> = vec![vec![false; m]; m];
        for (j, (_, verts)) in simplices.iter().enumerate() {
            if verts.len() > 1 {
                for omit in 0..verts.len() {
                    let mut face: Vec<usize> = verts.clone();
                    face.remove(omit);
                    let row = simplices
                        .iter()
                        .position(|(_, v)| *v == face)
                        .expect("face present");
                    matrix[row][j] = true;
                }
            }
        }
        let low = |col: &[Vec<bool>], j: usize| -> Option<usize> {
            (0..col.len()).rev().find(|&i| col[i][j])
        };
        for j in 0..m {
            'reduce: loop {
                match low(&matrix, j) {
                    None => break 'reduce,
                    Some(l) => {
                        let mut found = None;
                        for k in 0..j {
                            if low(&matrix, k) == Some(l) {
                                found = Some(k);
                                break;
                            }
                        }
                        match found {
                            None => break 'reduce,
                            Some(k) => {
                                for i in 0..m {
                                    matrix[i][j] ^= matrix[i][k];
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut out = vec![Vec::new(); fp.max_degree + 1];
        let mut is_pivot_row = vec![false; m];
        for j in 0..m {
            if let Some(l) = low(&matrix, j) {
                is_pivot_row[l] = true;
                let deg = simplices[l].1.len() - 1;
                let (b, d) = (simplices[l].0, simplices[j].0);
                if d > b && deg <= fp.max_degree {
                    out[deg].push((b, d));
                }
            }
        }
        for j in 0..m {
            if low(&matrix, j).is_none() && !is_pivot_row[j] {
                let deg = simplices[j].1.len() - 1;
                if deg <= fp.max_degree {
                    out[deg].push((simplices[j].0, f64::INFINITY));
                }
            }
        }
        for pairs in &mut out {
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }
        out
    }

    #[test]
    fn matches_brute_force_on_random_small_sets() {
        let mut rng = RngStream::new(41, 0).rng();
        let fp = FiltrationParams {
            max_radius: 1.2,
            max_degree: 1,
        };
        for case in 0..200 {
            let n = 2 + (case % 7);
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0])
                .collect();
            let fast = rips_persistence(&cfg_from(&pts), &fp).unwrap();
            let brute = brute_force(&pts, &fp);
            for deg in 0..=1 {
                assert_eq!(
                    fast[deg].pairs, brute[deg],
                    "case {case} degree {deg}: {pts:?}"
                );
            }
        }
    }

    #[test]
    fn stability_under_small_perturbation() {
        let mut rng = RngStream::new(42, 0).rng();
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|_| [rng.gen::<f64>() * 5.0, rng.gen::<f64>() * 5.0])
            .collect();
        let delta = 1e-3;
        let moved: Vec<[f64; 2]> = pts
            .iter()
            .map(|p| {
                [
                    p[0] + delta * (2.0 * rng.gen::<f64>() - 1.0) / 2f64.sqrt(),
                    p[1] + delta * (2.0 * rng.gen::<f64>() - 1.0) / 2f64.sqrt(),
                ]
            })
            .collect();
        let fp = FiltrationParams {
            max_radius: 1.0,
            max_degree: 1,
        };
        let a = rips_persistence(&cfg_from(&pts), &fp).unwrap();
        let b = rips_persistence(&cfg_from(&moved), &fp).unwrap();
        for deg in 0..=1 {
            assert_eq!(a[deg].pairs.len(), b[deg].pairs.len());
            for (pa, pb) in a[deg].pairs.iter().zip(&b[deg].pairs) {
                assert!((pa.0 - pb.0).abs() <= delta + 1e-12);
                if pa.1.is_finite() || pb.1.is_finite() {
                    assert!((pa.1 - pb.1).abs() <= delta + 1e-12);
                }
            }
        }
    }

    fn diagram(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram {
            degree: 1,
            pairs: pairs.to_vec(),
            source: "test".into(),
        }
    }

    #[test]
    fn tv_distance_limits() {
        let a = diagram(&[(0.2, 0.9), (0.4, 1.3)]);
        assert_abs_diff_eq!(
            pd_smooth_tv(&a, &a, 0.5, 0.05, 0.02).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // Atoms 10 kernel widths apart: disjoint densities, TV ~ 2.
        let far1 = diagram(&[(0.0, 1.0)]);
        let far2 = diagram(&[(20.0, 21.0)]);
        let tv = pd_smooth_tv(&far1, &far2, 0.5, 0.05, 0.05).unwrap();
        assert!((tv - 2.0).abs() < 0.02, "tv = {tv}");
    }

    #[test]
    fn tv_grid_convergence_and_symmetry() {
        let a = diagram(&[(0.1, 0.8), (0.3, 1.1), (0.2, 0.5)]);
        let b = diagram(&[(0.15, 0.7), (0.5, 1.4)]);
        let coarse = pd_smooth_tv(&a, &b, 0.5, 0.05, 0.04).unwrap();
        let fine = pd_smooth_tv(&a, &b, 0.5, 0.05, 0.02).unwrap();
        assert!((coarse - fine).abs() / fine < 0.005, "{coarse} vs {fine}");
        let swapped = pd_smooth_tv(&b, &a, 0.5, 0.05, 0.02).unwrap();
        assert_abs_diff_eq!(fine, swapped, epsilon = 1e-12);
    }

    #[test]
    fn tv_triangle_inequality_numerically() {
        let a = diagram(&[(0.1, 0.8)]);
        let b = diagram(&[(0.4, 1.2), (0.2, 0.6)]);
        let c = diagram(&[(0.9, 1.8)]);
        let ab = pd_smooth_tv(&a, &b, 0.5, 0.05, 0.02).unwrap();
        let bc = pd_smooth_tv(&b, &c, 0.5, 0.05, 0.02).unwrap();
        let ac = pd_smooth_tv(&a, &c, 0.5, 0.05, 0.02).unwrap();
        assert!(ac <= ab + bc + 1e-3);
    }

    #[test]
    fn tv_empty_semantics() {
        let empty = diagram(&[]);
        let full = diagram(&[(0.1, 0.9)]);
        assert_eq!(pd_smooth_tv(&empty, &empty, 0.5, 0.05, 0.02).unwrap(), 0.0);
        assert!(pd_smooth_tv(&empty, &full, 0.5, 0.05, 0.02).is_err());
    }

    #[test]
    fn nearest_point_distance_hand_values() {
        let x = diagram(&[(0.0, 0.0)]);
        let y = diagram(&[(3.0, 4.0)]);
        assert_abs_diff_eq!(pd_nearest_point_distance(&x, &y).unwrap(), 10.0);
        let x2 = diagram(&[(0.0, 1.0), (1.0, 1.0)]);
        let y2 = diagram(&[(0.0, 1.0)]);
        assert_abs_diff_eq!(pd_nearest_point_distance(&x2, &y2).unwrap(), 1.0);
        assert_abs_diff_eq!(pd_nearest_point_distance(&x, &x).unwrap(), 0.0);
        assert_abs_diff_eq!(
            pd_nearest_point_distance(&x2, &y2).unwrap(),
            pd_nearest_point_distance(&y2, &x2).unwrap()
        );
    }

    #[test]
    fn sweep_produces_a_row_per_sigma_and_metric() {
        let lat = crate::lattice::make_lattice(crate::lattice::LatticeKind::Triangular, 2, None)
            .unwrap();
        let rows = pd_distance_sweep(
            &lat,
            &[0.2, 0.4],
            3,
            &FiltrationParams::default(),
            &[PdMetric::Tv, PdMetric::Nearest],
            6.0,
            RngStream::new(43, 0),
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.mean_distance.is_finite() && r.mean_distance >= 0.0));
    }
}
