use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("scale error at level k={level}: {message}")]
    Scale { level: usize, message: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
