use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A brute-force enumeration would exceed its configured cap.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A scheme failed structural validation, or evaluation reached a
    /// downfix with no rule.
    #[error("scheme integrity: {0}")]
    SchemeIntegrity(String),

    /// A scheme file was readable JSON but not a valid scheme document.
    #[error("scheme format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
