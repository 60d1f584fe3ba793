use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("connectivity not achieved within {retries} retries ({context})")]
    ConnectivityRetriesExhausted { retries: usize, context: String },

    #[error("matrix is not in the Laplacian set: {0}")]
    NotInLaplacianSet(String),

    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    #[error("degenerate denominator in surrogate projection: {0}")]
    DegenerateDenominator(f64),

    #[error("signal not in the requested eigen-subspace (residual {0:.3e})")]
    SignalOutOfSubspace(f64),

    #[error("ideal low-pass filter has no pointwise frequency response; apply it by eigen-index")]
    IdealFilterByValue,

    #[error("filter annihilates the passband (zero denominator in sharpness ratio)")]
    ZeroPassband,

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 usage/config, 3 runtime/data, 4 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) => 2,
            Error::InvariantViolation(_) => 4,
            _ => 3,
        }
    }
}
