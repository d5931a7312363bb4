//! Lattices at unit density: canonical constructions, point enumeration,
//! Epstein zeta sums and the continuum tail integral.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{sphere_surface, unit_ball_volume};

/// Hard cap on materialized enumeration output.
pub const ENUMERATION_CAP: usize = 8_000_000;
/// Hard cap on streamed lattice sums (zeta evaluation).
const STREAM_CAP: usize = 3_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Triangular,
    Square,
    Cubic,
    Fcc,
    Bcc,
    Custom,
}

impl std::fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LatticeKind::Triangular => "triangular",
            LatticeKind::Square => "square",
            LatticeKind::Cubic => "cubic",
            LatticeKind::Fcc => "fcc",
            LatticeKind::Bcc => "bcc",
            LatticeKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// A full-rank lattice in R^d. Basis columns are the generators; canonical
/// kinds are scaled to covolume 1 (one point per unit volume on average).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lattice {
    pub name: String,
    pub dim: usize,
    /// Row-major d x d basis; column j is the j-th generator.
    pub basis: Vec<f64>,
    pub covolume: f64,
}

/// Lattice points inside a ball, sorted by (|p|, lexicographic coordinates).
#[derive(Debug, Clone)]
pub struct ShellEnumeration {
    pub points: Vec<Vec<f64>>,
    pub radius: f64,
}

pub fn make_lattice(
    kind: LatticeKind,
    dim: usize,
    basis_override: Option<&[f64]>,
) -> Result<Lattice> {
    let mismatch = |expected: usize| Error::DimensionMismatch {
        kind: kind.to_string(),
        expected,
        got: dim,
    };
    let basis: Vec<f64> = match kind {
        LatticeKind::Square => {
            if dim != 2 {
                return Err(mismatch(2));
            }
            vec![1.0, 0.0, 0.0, 1.0]
        }
        LatticeKind::Triangular => {
            if dim != 2 {
                return Err(mismatch(2));
            }
            // Rhombic cell of side a with a^2 * sqrt(3)/2 = 1.
            let a = (2.0 / 3.0f64.sqrt()).sqrt();
            vec![a, 0.5 * a, 0.0, a * 3.0f64.sqrt() / 2.0]
        }
        LatticeKind::Cubic => {
            if dim != 3 {
                return Err(mismatch(3));
            }
            let mut b = vec![0.0; 9];
            for i in 0..3 {
                b[i * 3 + i] = 1.0;
            }
            b
        }
        LatticeKind::Fcc => {
            if dim != 3 {
                return Err(mismatch(3));
            }
            // Primitive FCC basis has covolume 1/4; rescale to 1.
            let c = 4.0f64.powf(1.0 / 3.0);
            let half = 0.5 * c;
            vec![
                0.0, half, half, //
                half, 0.0, half, //
                half, half, 0.0,
            ]
        }
        LatticeKind::Bcc => {
            if dim != 3 {
                return Err(mismatch(3));
            }
            // Primitive BCC basis has covolume 1/2; rescale to 1.
            let c = 2.0f64.powf(1.0 / 3.0);
            let half = 0.5 * c;
            vec![
                c, 0.0, half, //
                0.0, c, half, //
                0.0, 0.0, half,
            ]
        }
        LatticeKind::Custom => {
            let b = basis_override.ok_or_else(|| Error::InvalidParameter {
                name: "basis_override",
                reason: "custom lattice needs an explicit basis".into(),
            })?;
            if b.len() != dim * dim {
                return Err(Error::InvalidParameter {
                    name: "basis_override",
                    reason: format!("expected {}x{} entries, got {}", dim, dim, b.len()),
                });
            }
            b.to_vec()
        }
    };
    let det = determinant(&basis, dim);
    let covolume = det.abs();
    if covolume < 1e-12 {
        return Err(Error::SingularBasis { covolume });
    }
    Ok(Lattice {
        name: kind.to_string(),
        dim,
        basis,
        covolume,
    })
}

impl Lattice {
    /// Basis column j (the j-th generator vector).
    pub fn generator(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.basis[i * self.dim + j]).collect()
    }

    /// Map integer coefficients to the lattice point.
    #[inline]
    pub fn point(&self, coeffs: &[i64], out: &mut [f64]) {
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..self.dim {
                acc += self.basis[i * self.dim + j] * coeffs[j] as f64;
            }
            out[i] = acc;
        }
    }

    /// Length of the shortest nonzero lattice vector (computed by
    /// enumeration in a small ball; fine at d <= 3 desk scale).
    pub fn shortest_vector(&self) -> f64 {
        let mut r = self.max_generator_norm();
        loop {
            if let Ok(sh) = enumerate_points(self, r, true) {
                if let Some(p) = sh.points.first() {
                    return norm(p);
                }
            }
            r *= 2.0;
        }
    }

    fn max_generator_norm(&self) -> f64 {
        (0..self.dim)
            .map(|j| norm(&self.generator(j)))
            .fold(0.0, f64::max)
    }

    /// Rows of the inverse basis; row norms bound the integer coefficients
    /// of any lattice point inside a ball.
    fn inverse_rows(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        let inv = invert(&self.basis, d);
        (0..d).map(|i| inv[i * d..(i + 1) * d].to_vec()).collect()
    }

    /// Distinct squared norms and multiplicities of lattice points within
    /// `radius` (origin excluded). Used by the exact coverage series, where
    /// every quantity depends on a site only through its modulus.
    pub fn shell_counts(&self, radius: f64) -> Result<Vec<(f64, usize)>> {
        let mut map: std::collections::BTreeMap<u64, (f64, usize)> = Default::default();
        stream_points(self, radius, |r2| {
            // Quantize to group floating-point-equal norms.
            let key = (r2 * 1e9).round() as u64;
            let e = map.entry(key).or_insert((r2, 0));
            e.1 += 1;
        })?;
        Ok(map.into_values().collect())
    }
}

pub fn enumerate_points(lat: &Lattice, radius: f64, exclude_origin: bool) -> Result<ShellEnumeration> {
    if radius <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: format!("must be positive, got {radius}"),
        });
    }
    let d = lat.dim;
    let expected = unit_ball_volume(d) * radius.powi(d as i32) / lat.covolume;
    if expected > ENUMERATION_CAP as f64 {
        return Err(Error::ResourceCap {
            what: "lattice enumeration",
            needed: expected as usize,
            cap: ENUMERATION_CAP,
        });
    }
    let rows = lat.inverse_rows();
    let bounds: Vec<i64> = rows.iter().map(|r| (radius * norm(r)).ceil() as i64).collect();
    let mut coeffs = vec![0i64; d];
    let mut p = vec![0.0; d];
    let mut points: Vec<Vec<f64>> = Vec::new();
    let r2 = radius * radius;
    let mut walk = |coeffs: &mut Vec<i64>| -> Result<()> {
        // odometer over the integer box
        for i in 0..d {
            coeffs[i] = -bounds[i];
        }
        loop {
            let origin = coeffs.iter().all(|&c| c == 0);
            if !(origin && exclude_origin) {
                lat.point(coeffs, &mut p);
                if dot(&p, &p) <= r2 {
                    points.push(p.clone());
                    if points.len() > ENUMERATION_CAP {
                        return Err(Error::ResourceCap {
                            what: "lattice enumeration",
                            needed: points.len(),
                            cap: ENUMERATION_CAP,
                        });
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == d {
                    return Ok(());
                }
                coeffs[i] += 1;
                if coeffs[i] <= bounds[i] {
                    break;
                }
                coeffs[i] = -bounds[i];
                i += 1;
            }
        }
    };
    walk(&mut coeffs)?;
    points.sort_by(|a, b| {
        let na = dot(a, a);
        let nb = dot(b, b);
        na.total_cmp(&nb).then_with(|| {
            for (x, y) in a.iter().zip(b.iter()) {
                let c = x.total_cmp(y);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    Ok(ShellEnumeration { points, radius })
}

/// Visit every nonzero lattice point with |p| <= radius, without
/// materializing, calling `f` with the squared norm.
fn stream_points<F: FnMut(f64)>(lat: &Lattice, radius: f64, mut f: F) -> Result<()> {
    let d = lat.dim;
    let rows = lat.inverse_rows();
    let bounds: Vec<i64> = rows.iter().map(|r| (radius * norm(r)).ceil() as i64).collect();
    let box_size: f64 = bounds.iter().map(|&b| (2 * b + 1) as f64).product();
    if box_size > STREAM_CAP as f64 {
        return Err(Error::ResourceCap {
            what: "lattice sum",
            needed: box_size as usize,
            cap: STREAM_CAP,
        });
    }
    let r2 = radius * radius;
    let mut coeffs = vec![0i64; d];
    for i in 0..d {
        coeffs[i] = -bounds[i];
    }
    let mut p = vec![0.0; d];
    loop {
        if !coeffs.iter().all(|&c| c == 0) {
            lat.point(&coeffs, &mut p);
            let n2 = dot(&p, &p);
            if n2 <= r2 {
                f(n2);
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return Ok(());
            }
            coeffs[i] += 1;
            if coeffs[i] <= bounds[i] {
                break;
            }
            coeffs[i] = -bounds[i];
            i += 1;
        }
    }
}

/// Epstein zeta E(s) = sum over nonzero lattice points of |p|^{-s},
/// to guaranteed relative error `rel_tol`.
///
/// The sum is truncated at a radius R where the integral bound on the tail
/// (times a safety factor of 2 for shell discreteness) is below tolerance;
/// the integral estimate itself is added back, so the returned value carries
/// at most the stated relative error.
pub fn epstein_zeta(lat: &Lattice, s: f64, rel_tol: f64) -> Result<f64> {
    let d = lat.dim;
    if s <= d as f64 {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("Epstein zeta diverges for s <= dim ({s} <= {d})"),
        });
    }
    if rel_tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "rel_tol",
            reason: "must be positive".into(),
        });
    }
    // Pilot sum for the scale of the answer.
    let pilot_radius = 6.0 * lat.max_generator_norm();
    let pilot = truncated_zeta_sum(lat, s, pilot_radius)?;
    if pilot <= 0.0 {
        return Err(Error::Numerical("empty pilot zeta sum".into()));
    }
    // integral tail: (1/covol) * surf(S^{d-1}) * R^{d-s} / (s-d)
    let coeff = sphere_surface(d) / (lat.covolume * (s - d as f64));
    // Require 2 * integral(R) <= rel_tol * pilot (safety factor 2).
    let radius = (2.0 * coeff / (rel_tol * pilot))
        .powf(1.0 / (s - d as f64))
        .max(pilot_radius);
    let sum = truncated_zeta_sum(lat, s, radius)?;
    let tail = coeff * radius.powf(d as f64 - s);
    Ok(sum + tail)
}

fn truncated_zeta_sum(lat: &Lattice, s: f64, radius: f64) -> Result<f64> {
    // Kahan-compensated; order is the fixed odometer order.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let half = 0.5 * s;
    let int_half = half.round();
    let even = (half - int_half).abs() < 1e-14 && int_half >= 1.0;
    let k = int_half as i32;
    stream_points(lat, radius, |r2| {
        let term = if even {
            1.0 / r2.powi(k)
        } else {
            r2.powf(-half)
        };
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    })?;
    Ok(sum)
}

/// Continuum tail integral of |u|^{-s} outside radius R for a unit-intensity
/// process: surf(S^{d-1}) R^{d-s} / (s-d).
pub fn zeta_tail_integral(lat: &Lattice, s: f64, radius: f64) -> Result<f64> {
    let d = lat.dim as f64;
    if s <= d {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("tail integral diverges for s <= dim ({s} <= {d})"),
        });
    }
    if radius <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: "must be positive".into(),
        });
    }
    Ok(sphere_surface(lat.dim) * radius.powf(d - s) / (s - d))
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn determinant(m: &[f64], d: usize) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..d {
        let (piv, _) = (col..d)
            .map(|r| (r, a[r * d + col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if a[piv * d + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..d {
                a.swap(col * d + j, piv * d + j);
            }
            det = -det;
        }
        det *= a[col * d + col];
        for r in (col + 1)..d {
            let f = a[r * d + col] / a[col * d + col];
            for j in col..d {
                a[r * d + j] -= f * a[col * d + j];
            }
        }
    }
    det
}

fn invert(m: &[f64], d: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    for col in 0..d {
        let (piv, _) = (col..d)
            .map(|r| (r, a[r * d + col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if piv != col {
            for j in 0..d {
                a.swap(col * d + j, piv * d + j);
                inv.swap(col * d + j, piv * d + j);
            }
        }
        let p = a[col * d + col];
        for j in 0..d {
            a[col * d + j] /= p;
            inv[col * d + j] /= p;
        }
        for r in 0..d {
            if r != col {
                let f = a[r * d + col];
                for j in 0..d {
                    a[r * d + j] -= f * a[col * d + j];
                    inv[r * d + j] -= f * inv[col * d + j];
                }
            }
        }
    }
    inv
}
