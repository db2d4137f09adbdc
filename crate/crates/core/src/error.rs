use thiserror::Error;

pub type Result<T> = std::result::Result<T, EwpoError>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration or conflicting options.
    Usage,
    /// Malformed or insufficient input data.
    Data,
    /// The data are well formed but the estimator is undefined on them.
    Numeric,
}

#[derive(Debug, Error)]
pub enum EwpoError {
    #[error("insufficient observations: need at least {need}, got {got}")]
    InsufficientObservations { need: usize, got: usize },

    #[error("length mismatch: x has {x} entries, y has {y}")]
    LengthMismatch { x: usize, y: usize },

    #[error("non-finite value in `{field}` at index {index}")]
    NonFinite { field: &'static str, index: usize },

    #[error("degenerate pair ({i}, {j}): x values coincide")]
    DegeneratePair { i: usize, j: usize },

    #[error("all {pairs} pairs are degenerate (zero x difference)")]
    AllPairsDegenerate { pairs: usize },

    #[error("weights sum to zero")]
    WeightsSumToZero,

    #[error("collinear regressors while partialling out regressor {k}: conditioning ratio {ratio:e}")]
    CollinearRegressors { k: usize, ratio: f64 },

    #[error("{0}")]
    Undefined(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {what} `{name}` (expected one of: {options})")]
    UnknownStrategy {
        what: &'static str,
        name: String,
        options: String,
    },
}

impl EwpoError {
    pub fn class(&self) -> ErrorClass {
        match self {
            EwpoError::InvalidConfig(_) | EwpoError::UnknownStrategy { .. } => ErrorClass::Usage,
            EwpoError::InsufficientObservations { .. }
            | EwpoError::LengthMismatch { .. }
            | EwpoError::NonFinite { .. } => ErrorClass::Data,
            EwpoError::DegeneratePair { .. }
            | EwpoError::AllPairsDegenerate { .. }
            | EwpoError::WeightsSumToZero
            | EwpoError::CollinearRegressors { .. }
            | EwpoError::Undefined(_) => ErrorClass::Numeric,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        EwpoError::InvalidConfig(msg.into())
    }
}
