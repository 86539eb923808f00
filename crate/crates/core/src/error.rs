use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("mesh resolution must be at least 2 cells per axis, got {0}")]
    MeshTooCoarse(usize),

    #[error("unsupported dimension {0}; only 1 and 2 are available")]
    UnsupportedDimension(usize),

    #[error("discrete function does not live on the problem mesh")]
    MeshMismatch,

    #[error("unknown Lagrangian family `{0}`")]
    UnknownFamily(String),

    #[error("invalid family parameterization: {0}")]
    InvalidFamily(String),

    #[error("{stage}: {reason}")]
    Solver { stage: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
