use thiserror::Error;

/// Errors raised by domain construction and the measurement routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain has no inside cells")]
    EmptyDomain,
    #[error("domain has an empty complement")]
    EmptyComplement,
    #[error("grid spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty ball: no cell centers within radius {radius} of {center:?}")]
    EmptyBall { center: [f64; 2], radius: f64 },
    #[error("no valid samples: {0}")]
    NoValidSamples(String),
    #[error("cell {0} is not an inside cell")]
    NotInside(usize),
    #[error("degenerate corpus: every denominator vanished")]
    DegenerateCorpus,
    #[error("invalid test function `{label}`: {reason}")]
    InvalidTestFunction { label: String, reason: String },
    #[error("no admissible ball: {0}")]
    NoAdmissibleBall(String),
    #[error("no admissible pairs: {0}")]
    NoAdmissiblePairs(String),
    #[error("hypotheses violated: {0}")]
    Hypotheses(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl LabError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        LabError::InvalidParameter(msg.into())
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
