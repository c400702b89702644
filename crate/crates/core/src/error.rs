use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("unknown channel preset `{0}`")]
    UnknownPreset(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("singular expansion system (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("channel is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("non-physical outcome probability {0:.6e}")]
    NonPhysicalProbability(f64),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed input: {0}")]
    Format(String),
}
