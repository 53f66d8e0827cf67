use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] lowlying_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: field `{field}`: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Stream(#[from] std::io::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        AppError::Parse { path: path.into(), line, field: field.into(), message: message.into() }
    }

    /// 1 for verification failures, 2 for usage errors and anything that
    /// stopped a run before it produced a result.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Verification(_) => 1,
            AppError::Core(lowlying_core::Error::VerificationFailure { .. }) => 1,
            _ => 2,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
