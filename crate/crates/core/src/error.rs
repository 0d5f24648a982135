use thiserror::Error;

/// Errors raised by kernel evaluation, embeddings, oracles and quadrature.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("point outside the domain: {0}")]
    OutsideDomain(String),

    #[error("point is not on the unit sphere (norm {0})")]
    OffSphere(f64),

    #[error("Gram matrix is not positive definite even with jitter {0:e}")]
    IllConditioned(f64),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("measure cannot be sampled: {0}")]
    NotSampleable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
