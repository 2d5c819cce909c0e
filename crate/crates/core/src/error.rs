use thiserror::Error;

/// Errors raised by the simulator and protocol layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("qubit count {n} exceeds cap {cap}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("overlapping or duplicate qubit indices")]
    OverlappingIndices,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("zero-probability branch requested")]
    ZeroProbabilityBranch,
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),
    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),
    #[error("insufficient copies: need {need}, have {have}")]
    InsufficientCopies { need: usize, have: usize },
    #[error("mask context already used")]
    MaskReuse,
    #[error("adversary strategy not admissible: {0}")]
    Strategy(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
