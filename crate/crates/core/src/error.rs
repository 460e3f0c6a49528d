use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cutoff too small: truncation leakage {leakage:.3e} exceeds bound {bound:.3e}")]
    CutoffTooSmall { leakage: f64, bound: f64 },

    #[error("superposition has vanishing norm ({norm:.3e})")]
    DegenerateSuperposition { norm: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("conditional state requested for a branch of probability {probability:.3e}")]
    ZeroProbabilityBranch { probability: f64 },

    #[error("Hilbert-space dimension {dim} exceeds the dense-matrix cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("frequency condition violated: {0}")]
    FrequencyConditionViolated(String),

    #[error("perturbative solution outside its validity domain: eps*N = {eps_n:.4} > {limit}")]
    ValidityDomainExceeded { eps_n: f64, limit: f64 },

    #[error("coherent pair not distinguishable: |<a|-a>| = {overlap:.4} > 0.5")]
    AmbiguousSupport { overlap: f64 },

    #[error("signal has {weight:.3e} of its weight outside the coherent pair span")]
    OffPairSupport { weight: f64 },

    #[error("virtual displacement undefined: Im(beta) = 0")]
    ZeroImaginaryPart,

    #[error("value out of range: {0}")]
    RangeError(String),

    #[error("schedule times are not strictly increasing at sample {index}")]
    NonMonotoneTime { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes and C error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Precondition,
    Numeric,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::RangeError(_) | Error::ShapeMismatch(_) => {
                ErrorKind::Config
            }
            Error::CutoffTooSmall { .. }
            | Error::FrequencyConditionViolated(_)
            | Error::ValidityDomainExceeded { .. }
            | Error::AmbiguousSupport { .. }
            | Error::OffPairSupport { .. }
            | Error::ZeroImaginaryPart
            | Error::NonMonotoneTime { .. } => ErrorKind::Precondition,
            Error::DegenerateSuperposition { .. }
            | Error::ZeroProbabilityBranch { .. }
            | Error::DimensionTooLarge { .. } => ErrorKind::Numeric,
            Error::Io(_) | Error::Json(_) => ErrorKind::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
