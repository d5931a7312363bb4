use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice kind {kind} requires dimension {expected}, got {got}")]
    DimensionMismatch {
        kind: String,
        expected: usize,
        got: usize,
    },

    #[error("basis matrix is singular (covolume {covolume:.3e})")]
    SingularBasis { covolume: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resource cap exceeded: {what} would need {needed} (cap {cap})")]
    ResourceCap {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("point configuration is empty")]
    EmptyConfiguration,

    #[error("persistence diagram is empty")]
    EmptyDiagram,

    #[error("eigensolver failed (LAPACK zgeev info = {info})")]
    Eigensolver { info: i32 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
