use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: curvature_lines::Error,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Numerical { .. } | Self::Verification(_) => 2,
            Self::Io { .. } => 3,
        }
    }

    pub fn numerical(context: impl Into<String>) -> impl FnOnce(curvature_lines::Error) -> Self {
        let context = context.into();
        move |source| Self::Numerical { context, source }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
