use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("reference matrix has no entry with modulus above {0:e}")]
    ZeroReference(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid qubit index {index} for a {n_qubits}-qubit register")]
    InvalidQubit { index: usize, n_qubits: usize },

    #[error("invalid angle: {0}")]
    InvalidAngle(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("empty pulse sequence")]
    EmptySequence,

    #[error("no conditioned qubits; a global phase needs no pulses")]
    NoConditionedQubits,

    #[error("z-axis pulse required, got {0}")]
    NotZAxis(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot synthesize step: {0}")]
    Unsynthesizable(String),

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
