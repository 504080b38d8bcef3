use crate::tree::VertexId;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid norm spec: {0}")]
    InvalidNormSpec(String),

    #[error("empty seminorm list")]
    EmptySeminormList,

    #[error("mixed scalar modes")]
    MixedScalarModes,

    #[error("division by zero scalar")]
    DivisionByZero,

    #[error("invalid truncation params: {0}")]
    InvalidWindow(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("missing weight for vertex {0}")]
    MissingWeight(VertexId),

    #[error("weight condition violated: {0}")]
    WeightCondition(String),

    #[error("unknown vertex {0} for this operator")]
    UnknownVertex(VertexId),

    #[error("application leaks out of the truncation window at vertex {vertex} (step {step})")]
    LeakageOutOfWindow { vertex: VertexId, step: usize },

    #[error("chain too short: length must be at least 1")]
    ChainTooShort,

    #[error("tolerance must be positive")]
    NonPositiveDelta,

    #[error("chain endpoint mismatch at concatenation")]
    EndpointMismatch,

    #[error("scaling by zero is rejected; use a constant-zero chain instead")]
    ZeroScale,

    #[error("weight modulus out of range: {0}")]
    WeightOutOfRange(String),

    #[error("truncation window too small: needs {0}")]
    UndersizedWindow(String),

    #[error("operator family {0} not supported by this recipe")]
    UnsupportedOperator(String),

    #[error("multiple descendants feed the target through vertex {0}")]
    NonUniqueInfluence(VertexId),

    #[error("target coordinate unreachable: zero influence with nonzero defect")]
    Unreachable,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("zero weight at index {0}: use the zero-weight analyzer")]
    ZeroWeight(i64),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
