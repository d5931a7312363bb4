//! Samplers for the three point-process families at unit intensity in a
//! ball window: Poisson, Gaussian-perturbed lattices, and the Ginibre
//! eigenvalue ensemble.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_points, Lattice};
use crate::numerics::special::unit_ball_volume;
use crate::rng::RngStream;

/// A finite point set in a ball window, the common currency of all
/// samplers and estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    pub dim: usize,
    /// Flat row-major storage, `dim` coordinates per point.
    pub points: Vec<f64>,
    pub window_radius: f64,
    /// Nominal points per unit volume.
    pub intensity: f64,
    /// Sampler, parameters and seed that produced this configuration.
    pub provenance: String,
}

impl PointConfiguration {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.points.extend_from_slice(p);
    }
}

/// Gaussian perturbation parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PerturbationSpec {
    /// Standard deviation per coordinate.
    pub sigma: f64,
    #[serde(default)]
    pub apply_uniform_shift: bool,
}

impl PerturbationSpec {
    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            apply_uniform_shift: false,
        }
    }
}

/// Volume of the d-ball of radius R.
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    unit_ball_volume(dim) * radius.powi(dim as i32)
}

/// Homogeneous unit-intensity Poisson process in the ball window.
pub fn sample_poisson(dim: usize, window_radius: f64, stream: RngStream) -> Result<PointConfiguration> {
    if window_radius <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "window_radius",
            reason: "must be positive".into(),
        });
    }
    let mut rng = stream.rng();
    let mean = ball_volume(dim, window_radius);
    let n = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::Numerical(format!("poisson sampler: {e}")))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut points = Vec::with_capacity(n * dim);
    let mut dir = vec![0.0; dim];
    for _ in 0..n {
        // uniform in the ball: isotropic direction, radius ~ R U^{1/d}
        loop {
            let mut s = 0.0f64;
            for v in dir.iter_mut() {
                *v = rng.sample(StandardNormal);
                s += *v * *v;
            }
            if s > 0.0 {
                let u: f64 = rng.gen();
                let r = window_radius * u.powf(1.0 / dim as f64) / s.sqrt();
                for v in &dir {
                    points.push(v * r);
                }
                break;
            }
        }
    }
    Ok(PointConfiguration {
        dim,
        points,
        window_radius,
        intensity: 1.0,
        provenance: format!(
            "poisson(dim={dim},R={window_radius},seed={},stream={})",
            stream.master_seed, stream.stream_id
        ),
    })
}

/// Gaussian-perturbed lattice in the ball window.
///
/// Each lattice site `n` with `|n| <= R + margin` emits `n + sigma xi_n`
/// with `xi_n` standard Gaussian, keyed by the integer coordinates of `n`;
/// the result is then trimmed to the window. The margin `6 sigma +
/// shortest vector` keeps the edge bias below Gaussian tail mass.
pub fn sample_perturbed_lattice(
    lat: &Lattice,
    spec: &PerturbationSpec,
    window_radius: f64,
    stream: RngStream,
) -> Result<PointConfiguration> {
    sample_perturbed_lattice_impl(lat, spec, window_radius, stream, None)
}

/// Same as [`sample_perturbed_lattice`], but with the perturbation of one
/// designated site (integer coordinates) re-drawn with salt `variant`.
/// All other sites keep exactly the offsets of the unsalted sample.
pub fn sample_perturbed_lattice_resampled(
    lat: &Lattice,
    spec: &PerturbationSpec,
    window_radius: f64,
    stream: RngStream,
    site: &[i64],
    variant: u64,
) -> Result<PointConfiguration> {
    sample_perturbed_lattice_impl(lat, spec, window_radius, stream, Some((site, variant)))
}

fn sample_perturbed_lattice_impl(
    lat: &Lattice,
    spec: &PerturbationSpec,
    window_radius: f64,
    stream: RngStream,
    resample: Option<(&[i64], u64)>,
) -> Result<PointConfiguration> {
    if window_radius <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "window_radius",
            reason: "must be positive".into(),
        });
    }
    if spec.sigma < 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: "must be nonnegative".into(),
        });
    }
    let dim = lat.dim;
    let shortest = lat.shortest_vector();
    let shift = if spec.apply_uniform_shift {
        let mut rng = stream.rng();
        let coeffs: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
        let mut s = vec![0.0; dim];
        for i in 0..dim {
            for j in 0..dim {
                s[i] += lat.basis[i * dim + j] * coeffs[j];
            }
        }
        s
    } else {
        vec![0.0; dim]
    };
    let shift_norm = shift.iter().map(|x| x * x).sum::<f64>().sqrt();
    let margin = 6.0 * spec.sigma + shortest + shift_norm;
    let enumeration = enumerate_points(lat, window_radius + margin, false)?;
    // Integer coordinates key the per-site randomness; recover them from
    // the point through the inverse basis.
    let inv = invert_basis(lat);
    let mut points = Vec::new();
    let r2 = window_radius * window_radius;
    let mut coords = vec![0i64; dim];
    let mut pos = vec![0.0; dim];
    for site in &enumeration.points {
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..dim {
                acc += inv[i * dim + j] * site[j];
            }
            coords[i] = acc.round() as i64;
        }
        let mut site_rng = match resample {
            Some((target, variant)) if coords == target => {
                let mut salted = coords.clone();
                salted.push(variant as i64 | i64::MIN);
                stream.site_rng(&salted)
            }
            _ => stream.site_rng(&coords),
        };
        let xi = site_rng.normal_vector(dim);
        let mut n2 = 0.0;
        for i in 0..dim {
            pos[i] = site[i] + shift[i] + spec.sigma * xi[i];
            n2 += pos[i] * pos[i];
        }
        if n2 <= r2 {
            points.extend_from_slice(&pos);
        }
    }
    Ok(PointConfiguration {
        dim,
        points,
        window_radius,
        intensity: 1.0 / lat.covolume,
        provenance: format!(
            "perturbed-lattice({},sigma={},R={window_radius},seed={},stream={})",
            lat.name, spec.sigma, stream.master_seed, stream.stream_id
        ),
    })
}

fn invert_basis(lat: &Lattice) -> Vec<f64> {
    let d = lat.dim;
    // Small fixed-size Gauss-Jordan; lattice bases are well conditioned.
    let mut a = lat.basis.clone();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&r, &s| a[r * d + col].abs().total_cmp(&a[s * d + col].abs()))
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

/// Default fraction of the circular-law radius trimmed off the Ginibre
/// window to exclude the edge-fluctuation annulus.
pub const GINIBRE_EDGE_TRIM: f64 = 0.15;

/// Eigenvalues of an n x n matrix of i.i.d. standard complex Gaussians,
/// rescaled by 1/sqrt(pi) to unit bulk intensity and trimmed to the window
/// `(1 - delta_edge) sqrt(n/pi)`.
pub fn sample_ginibre(n_eigen: usize, delta_edge: f64, stream: RngStream) -> Result<PointConfiguration> {
    if n_eigen == 0 {
        return Err(Error::InvalidParameter {
            name: "n_eigen",
            reason: "must be at least 1".into(),
        });
    }
    if !(0.0..1.0).contains(&delta_edge) {
        return Err(Error::InvalidParameter {
            name: "delta_edge",
            reason: "must lie in [0, 1)".into(),
        });
    }
    let eigenvalues = ginibre_eigenvalues(n_eigen, stream)?;
    let window_radius = (1.0 - delta_edge) * (n_eigen as f64 / std::f64::consts::PI).sqrt();
    let scale = 1.0 / std::f64::consts::PI.sqrt();
    let mut points = Vec::new();
    for z in &eigenvalues {
        let x = z.re * scale;
        let y = z.im * scale;
        if x * x + y * y <= window_radius * window_radius {
            points.push(x);
            points.push(y);
        }
    }
    Ok(PointConfiguration {
        dim: 2,
        points,
        window_radius,
        intensity: 1.0,
        provenance: format!(
            "ginibre(n={n_eigen},delta={delta_edge},seed={},stream={})",
            stream.master_seed, stream.stream_id
        ),
    })
}

/// Untrimmed, unit-intensity-rescaled Ginibre points (all `n_eigen` of
/// them). Exposed for distributional checks of the radial law.
pub fn ginibre_points_untrimmed(n_eigen: usize, stream: RngStream) -> Result<Vec<[f64; 2]>> {
    let scale = 1.0 / std::f64::consts::PI.sqrt();
    Ok(ginibre_eigenvalues(n_eigen, stream)?
        .iter()
        .map(|z| [z.re * scale, z.im * scale])
        .collect())
}

fn ginibre_eigenvalues(n: usize, stream: RngStream) -> Result<Vec<Complex64>> {
    let mut rng = stream.rng();
    // Standard complex Gaussian: real and imaginary parts N(0, 1/2).
    let half = 0.5f64.sqrt();
    let mut a: Vec<Complex64> = (0..n * n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * half, im * half)
        })
        .collect();
    zgeev_eigenvalues(n, &mut a)
}

// LAPACK general complex eigensolver; the reference implementation is
// single-threaded and bit-reproducible for a given input.
#[link(name = "lapack")]
extern "C" {
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

fn zgeev_eigenvalues(n: usize, a: &mut [Complex64]) -> Result<Vec<Complex64>> {
    assert_eq!(a.len(), n * n);
    let ni = n as i32;
    let mut w = vec![Complex64::default(); n];
    let lwork = (4 * n.max(1)) as i32;
    let mut work = vec![Complex64::default(); lwork as usize];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let one = 1i32;
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            std::ptr::null_mut(),
            &one,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver { info });
    }
    Ok(w)
}
