use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure at {point}: {source}")]
    Numerical {
        point: String,
        #[source]
        source: tripod_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } | CliError::Csv { .. } => 1,
        }
    }

    pub(crate) fn numerical(point: impl Into<String>) -> impl FnOnce(tripod_core::Error) -> Self {
        let point = point.into();
        move |source| CliError::Numerical { point, source }
    }
}
