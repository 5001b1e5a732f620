use thiserror::Error;

use crate::dynamics::PhasePoint;

pub type Result<T, E = HenonError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HenonError {
    #[error("parameter a must be nonzero and finite")]
    NonInvertible,

    #[error("orbit overflowed at iterate {index}")]
    Overflow { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point:?} does not escape in the {direction} direction")]
    NotEscaping { point: PhasePoint, direction: &'static str },

    #[error("escape undecided after {iterations} iterations")]
    Undecided { iterations: usize },

    #[error("parameter outside the perturbative regime: {0}")]
    RegimeViolation(String),

    #[error("refinement diverged: residual {residual:e} after {steps} steps")]
    Divergence { residual: f64, steps: usize },

    #[error("classification ambiguous between components {0} and {1}")]
    Ambiguous(String, String),

    #[error("{0}")]
    OutOfRange(String),

    #[error("near-singular jacobian: {0}")]
    Singular(String),

    #[error("no samples found: {0}")]
    Empty(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl HenonError {
    /// Short machine-readable tag, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            HenonError::NonInvertible => "non_invertible",
            HenonError::Overflow { .. } => "overflow",
            HenonError::InvalidArgument(_) => "invalid_argument",
            HenonError::NotEscaping { .. } => "not_escaping",
            HenonError::Undecided { .. } => "undecided",
            HenonError::RegimeViolation(_) => "regime_violation",
            HenonError::Divergence { .. } => "divergence",
            HenonError::Ambiguous(..) => "ambiguous",
            HenonError::OutOfRange(_) => "out_of_range",
            HenonError::Singular(_) => "singular",
            HenonError::Empty(_) => "empty",
            HenonError::Io(_) => "io",
            HenonError::Format(_) => "format",
        }
    }
}

impl From<std::io::Error> for HenonError {
    fn from(e: std::io::Error) -> Self {
        HenonError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HenonError {
    fn from(e: serde_json::Error) -> Self {
        HenonError::Format(e.to_string())
    }
}
