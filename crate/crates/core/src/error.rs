use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimension mismatch, bad parameters).
    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A configured size cap would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),

    /// An operation was called outside its supported domain.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A schedule could not be built (closed gap, bad epsilon).
    #[error("schedule error: {0}")]
    Schedule(String),

    /// The full problem has no solution.
    #[error("unsatisfiable")]
    Unsatisfiable,

    /// The partial problem on the primary variables has no solution.
    #[error("no partial solutions")]
    NoPartialSolutions,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
