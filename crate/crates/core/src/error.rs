use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("non-finite value at parameter {index}: {detail}")]
    NumericFailure { index: usize, detail: String },

    /// Training diverged. `last_good` holds the JSON checkpoint of the last
    /// parameters for which the loss was finite.
    #[error("training failed at epoch {epoch}: {detail}")]
    TrainingFailure {
        epoch: usize,
        detail: String,
        last_good: Box<crate::transform::Checkpoint>,
    },

    #[error("power-law fit refused: {0}")]
    FitRefused(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("qasm parse error at line {line}: {msg}")]
    Qasm { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
