use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site index {index} out of range for a chain of {n} sites")]
    SiteOutOfRange { index: usize, n: usize },

    #[error("eigensolver did not converge for eigenvalue {index} within {budget} iterations")]
    NoConvergence { index: usize, budget: usize },

    #[error(
        "degenerate spectrum: minimum level gap {min_gap:e} is below tolerance {tolerance:e}; \
         time averages need nondegenerate levels (increase the disorder or change the seed)"
    )]
    DegenerateSpectrum { min_gap: f64, tolerance: f64 },

    #[error("distribution is not normalized: sum = {sum}")]
    Unnormalized { sum: f64 },

    #[error("negative probability {value:e} at site {site}")]
    NegativeProbability { site: usize, value: f64 },

    #[error("matrix is not symmetric: max |H_ij - H_ji| = {0:e}")]
    NotSymmetric(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
