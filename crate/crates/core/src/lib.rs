//! Numerical core for coverage analysis of structured wireless networks:
//! lattices and Epstein zeta functions, point-process samplers, SINR
//! coverage (Monte Carlo, exact series, small-perturbation asymptotics),
//! persistent homology, and spatial summary statistics.

pub mod asymptotics;
pub mod error;
pub mod exactseries;
pub mod io;
pub mod lattice;
pub mod numerics;
pub mod pointproc;
pub mod rng;
pub mod sampler;
pub mod sinr;
pub mod spatialstats;
pub mod tda;

pub use error::{Error, Result};
pub use lattice::{make_lattice, Lattice, LatticeKind};
pub use pointproc::{PerturbationSpec, PointConfiguration};
pub use rng::RngStream;
pub use sampler::SamplerSpec;
pub use sinr::{CoverageCurve, NearestBase, SinrParams};
pub use spatialstats::NndEstimate;
pub use tda::{FiltrationParams, PdMetric, PersistenceDiagram};
