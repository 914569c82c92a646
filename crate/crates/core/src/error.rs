use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator must be square with dimension >= 2, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Lindblad rate must be finite and nonnegative, got {0}")]
    NegativeRate(f64),

    #[error("non-unique steady state: kernel dimension {0}")]
    NonUniqueSteadyState(usize),

    #[error("no unit-trace steady state exists")]
    NoSteadyState,

    #[error("reference state is not stationary (residual {0:e})")]
    NotStationary(f64),

    #[error("linear response system is inconsistent (residual {0:e})")]
    InconsistentResponse(f64),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("channel fully blocked (success probability {0:e})")]
    FullyBlocked(f64),

    #[error("missing measurement basis {0}")]
    MissingBasis(&'static str),

    #[error("calibration failed: {0}")]
    Calibration(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
