use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("missing artifacts: {0}")]
    Missing(String),
    #[error(transparent)]
    Core(#[from] pinlab::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) | CliError::Missing(_) => 2,
            CliError::Core(pinlab::Error::InvalidParameter(_)) => 2,
            _ => 1,
        }
    }
}
