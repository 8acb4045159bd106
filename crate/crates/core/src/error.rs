use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("coinciding interpolation nodes (min distance {0:e})")]
    DegenerateNodes(f64),
    #[error("could not draw parameters with margin {margin} after {tries} tries")]
    SamplingFailure { margin: f64, tries: usize },
    #[error("pole collision: {0}")]
    PoleCollision(String),
    #[error("root set is not on shell (residual {0:e})")]
    NotOnShell(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("left/right eigenvectors are not biorthogonal")]
    Biorthogonality,
    #[error("eigenvalue -tau not found in spectrum (distance {0:e})")]
    SpectrumPairing(f64),
    #[error("near-degenerate spectrum at the reference point (gap {0:e})")]
    DegenerateSpectrum(f64),
    #[error("retry budget exhausted: {0}")]
    RetryExhausted(String),
    #[error("limit did not converge: {0}")]
    LimitFailure(String),
    #[error("degenerate point set: {0}")]
    DegenerateSet(String),
    #[error("singular matrix")]
    Singular,
}

pub type Result<T> = std::result::Result<T, Error>;
