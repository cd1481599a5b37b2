use thiserror::Error;

#[derive(Debug, Error)]
pub enum SprError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// The family cannot support phase retrieval at all (e.g. every element has
    /// constant modulus).
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("insufficient spread: {0}")]
    InsufficientSpread(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SprError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SprError::InvalidArgument(msg.into()))
}
