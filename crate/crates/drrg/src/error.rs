//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DrrgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scene generation failed: {0}")]
    Generation(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training aborted: {0}")]
    Training(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DrrgError>;
