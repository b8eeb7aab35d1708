use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistently shaped input.
    Input,
    /// Well-formed input that violates a mathematical precondition.
    Precondition,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("malformed {what}: {detail}")]
    Shape { what: &'static str, detail: String },

    #[error("cannot normalize the zero vector")]
    ZeroVector,

    #[error("{which} is not a unit vector (norm {norm})")]
    NotUnit { which: String, norm: f64 },

    #[error("power iteration did not converge after {iterations} iterations (best estimate {estimate})")]
    NotConverged { estimate: f64, iterations: usize },

    #[error("{what} too large: {got} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("bound not applicable to a promise matrix (entry 0 at ({row}, {col}))")]
    PromiseMatrix { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("thresholds must satisfy 0 <= delta0 < delta1 <= 1 (got {delta0}, {delta1})")]
    ThresholdOrder { delta0: f64, delta1: f64 },

    #[error("vectors do not separate 0-pairs from 1-pairs (delta0 {delta0} >= delta1 {delta1})")]
    NotSeparating { delta0: f64, delta1: f64 },

    #[error("threshold embedding invalid for this matrix (first violation at ({row}, {col}))")]
    InvalidEmbedding { row: usize, col: usize },

    #[error("realization invalid: achieved margin {achieved} below claimed {claimed}")]
    InvalidRealization { achieved: f64, claimed: f64 },

    #[error("no valid projection after {attempts} attempts")]
    RetriesExhausted { attempts: usize },

    #[error("no separating arrangement found (best margin {best})")]
    NoSeparatingArrangement { best: f64 },

    #[error("threshold gap {gap} too small")]
    GapTooSmall { gap: f64 },

    #[error("vector norm {norm} exceeds bound {bound}")]
    NormBoundExceeded { norm: f64, bound: f64 },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DimensionMismatch { .. }
            | Error::Empty(_)
            | Error::NonFinite(_)
            | Error::Shape { .. } => ErrorClass::Input,
            _ => ErrorClass::Precondition,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
