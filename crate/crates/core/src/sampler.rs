//! Serializable sampler specifications, the single entry point experiment
//! drivers use to draw configurations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{make_lattice, LatticeKind};
use crate::pointproc::{
    sample_ginibre, sample_perturbed_lattice, sample_poisson, PerturbationSpec,
    PointConfiguration, GINIBRE_EDGE_TRIM,
};
use crate::rng::RngStream;

fn default_delta_edge() -> f64 {
    GINIBRE_EDGE_TRIM
}

/// A point-process model plus its parameters, serializable so experiment
/// configs and output manifests can carry it verbatim.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum SamplerSpec {
    Poisson {
        dim: usize,
        window_radius: f64,
    },
    PerturbedLattice {
        lattice: LatticeKind,
        dim: usize,
        sigma: f64,
        window_radius: f64,
        #[serde(default)]
        apply_uniform_shift: bool,
        /// Optional row-major basis override for `lattice = custom`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basis: Option<Vec<f64>>,
    },
    Ginibre {
        n_eigen: usize,
        #[serde(default = "default_delta_edge")]
        delta_edge: f64,
    },
}

impl SamplerSpec {
    pub fn dim(&self) -> usize {
        match self {
            SamplerSpec::Poisson { dim, .. } => *dim,
            SamplerSpec::PerturbedLattice { dim, .. } => *dim,
            SamplerSpec::Ginibre { .. } => 2,
        }
    }

    pub fn window_radius(&self) -> f64 {
        match self {
            SamplerSpec::Poisson { window_radius, .. } => *window_radius,
            SamplerSpec::PerturbedLattice { window_radius, .. } => *window_radius,
            SamplerSpec::Ginibre { n_eigen, delta_edge } => {
                (1.0 - delta_edge) * (*n_eigen as f64 / std::f64::consts::PI).sqrt()
            }
        }
    }

    /// Short human-readable tag for labels and manifests.
    pub fn label(&self) -> String {
        match self {
            SamplerSpec::Poisson { dim, window_radius } => {
                format!("poisson(d={dim},R={window_radius})")
            }
            SamplerSpec::PerturbedLattice {
                lattice,
                dim,
                sigma,
                window_radius,
                ..
            } => format!("{lattice}(d={dim},sigma={sigma},R={window_radius})"),
            SamplerSpec::Ginibre { n_eigen, delta_edge } => {
                format!("ginibre(n={n_eigen},delta={delta_edge})")
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SamplerSpec::Poisson { dim, window_radius } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter {
                        name: "dim",
                        reason: "must be at least 1".into(),
                    });
                }
                if *window_radius <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "window_radius",
                        reason: "must be positive".into(),
                    });
                }
            }
            SamplerSpec::PerturbedLattice {
                lattice,
                dim,
                sigma,
                window_radius,
                basis,
                ..
            } => {
                if *sigma < 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "sigma",
                        reason: "must be nonnegative".into(),
                    });
                }
                if *window_radius <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "window_radius",
                        reason: "must be positive".into(),
                    });
                }
                make_lattice(*lattice, *dim, basis.as_deref())?;
            }
            SamplerSpec::Ginibre { n_eigen, delta_edge } => {
                if *n_eigen == 0 {
                    return Err(Error::InvalidParameter {
                        name: "n_eigen",
                        reason: "must be at least 1".into(),
                    });
                }
                if !(0.0..1.0).contains(delta_edge) {
                    return Err(Error::InvalidParameter {
                        name: "delta_edge",
                        reason: "must lie in [0, 1)".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Draw one configuration using the given stream.
    pub fn sample(&self, stream: RngStream) -> Result<PointConfiguration> {
        match self {
            SamplerSpec::Poisson { dim, window_radius } => {
                sample_poisson(*dim, *window_radius, stream)
            }
            SamplerSpec::PerturbedLattice {
                lattice,
                dim,
                sigma,
                window_radius,
                apply_uniform_shift,
                basis,
            } => {
                let lat = make_lattice(*lattice, *dim, basis.as_deref())?;
                let spec = PerturbationSpec {
                    sigma: *sigma,
                    apply_uniform_shift: *apply_uniform_shift,
                };
                sample_perturbed_lattice(&lat, &spec, *window_radius, stream)
            }
            SamplerSpec::Ginibre { n_eigen, delta_edge } => {
                sample_ginibre(*n_eigen, *delta_edge, stream)
            }
        }
    }
}
