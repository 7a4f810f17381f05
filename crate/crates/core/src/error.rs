use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("soft potential rejected: gamma + 2s = {0} < 0 (hard potential required)")]
    SoftPotential(f64),

    #[error(
        "quadrature not converged: max entry change {max_change:.3e} exceeds tolerance {tol:.3e} under {what} refinement"
    )]
    NotConverged {
        what: &'static str,
        max_change: f64,
        tol: f64,
    },

    #[error("matrix is singular or system not solvable: {0}")]
    SingularSystem(String),

    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    #[error(
        "branch matching ambiguous at r = {r}: best eigenvector overlap {overlap:.3} < 0.7; refine the r grid"
    )]
    MatchingAmbiguity { r: f64, overlap: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("cache file corrupt: {0}")]
    CorruptCache(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
