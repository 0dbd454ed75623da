use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("moment vector has degree {available}, but {required} is required")]
    DegreeTooLow { required: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("fit degree {degree} is below the certificate degree {required} of the domain inequalities")]
    DegreeMismatch { degree: usize, required: usize },

    #[error("matrix is not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("moment matrix is numerically singular (condition estimate {condition:e})")]
    SingularMomentMatrix { condition: f64 },

    #[error("semidefinite solve ended with status {status:?} after {iterations} iterations")]
    SolverFailed {
        status: crate::sdp::SdpStatus,
        iterations: usize,
    },

    #[error("line search failed to find an ascent step")]
    LineSearchFailure,

    #[error("maximum-entropy objective is unbounded; moments are not those of a nonnegative measure")]
    Diverged,

    #[error("masks were rasterized on different grids")]
    GridMismatch,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
