use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid jump kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid rate field: {0}")]
    InvalidRateField(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("site outside window: {0}")]
    OutOfWindow(String),
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("simulation aborted: {0}")]
    SimulationAborted(String),
    #[error("stability condition violated: {0}")]
    Cfl(String),
    #[error("solution left the unit interval: {0}")]
    BoundViolation(String),
    #[error("trajectory was recorded without an event log")]
    MissingEventLog,
    #[error("malformed event: {0}")]
    MalformedEvent(String),
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
