//! CLI error type and the process exit-code mapping.

use thiserror::Error;

/// Anything the CLI can fail with. The variant decides the exit code:
/// usage errors exit 1, data errors 2, numerical failures 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("record '{id}' (line {line}) has no label; evaluation needs labeled records")]
    MissingLabels { id: String, line: usize },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Numerical(#[from] trustfuse_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse { .. }
            | CliError::Schema { .. }
            | CliError::MissingLabels { .. }
            | CliError::Config(_)
            | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
