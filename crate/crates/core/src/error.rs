use thiserror::Error;

/// Errors raised by the risk engine, the simulators and the run front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A computed extremal coefficient left [1, 2]; indicates a special-function bug.
    #[error("extremal coefficient {value} outside [1, 2] at h = {h}")]
    ThetaOutOfRange { h: f64, value: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("covariance matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("spectral truncation bound {bound:e} exceeds budget {budget:e}")]
    TruncationBudgetExceeded { bound: f64, budget: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether the error comes from configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidParameter(_) | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
