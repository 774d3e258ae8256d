use thiserror::Error;

/// Errors raised by the frame computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("spectrum cannot be evaluated at gamma = {gamma}: outside sampled range and no envelope")]
    OutOfRange { gamma: f64 },

    #[error("no tail control: {0}")]
    NoTailControl(String),

    #[error("truncation budget exceeded: {what} needs more than {limit} terms")]
    TruncationBudgetExceeded { what: String, limit: u64 },

    #[error("decay envelope cannot be certified beyond the probe range |gamma| <= {probe_max}")]
    EnvelopeUnsound { probe_max: f64 },

    #[error("Calderon denominator vanishes at gamma = {gamma} (value {value:e})")]
    DenominatorVanishes { gamma: f64, value: f64 },

    #[error("bound inapplicable: epsilon_K = {epsilon_k} >= sqrt(2bA) = {threshold}")]
    BoundInapplicable { epsilon_k: f64, threshold: f64 },

    #[error("target unreachable: no K <= {cap} meets the requested error")]
    TargetUnreachable { cap: u64 },

    #[error("frame condition violated: truncated Calderon sum is {min:e} at gamma = {gamma}")]
    FrameConditionViolated { gamma: f64, min: f64 },

    #[error("grid misaligned: {0}")]
    GridMisaligned(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("io: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
