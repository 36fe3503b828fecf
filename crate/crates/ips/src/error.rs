use std::path::PathBuf;

/// Failure of a CLI command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: line {line}: {message}", path.display())]
    Input {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("record `{0}` not found in input")]
    MissingRecord(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Input { .. } | CliError::Config(_) => 2,
            CliError::Backend(_) => 3,
            CliError::MissingRecord(_) => 4,
        }
    }

    pub fn backend(e: impl std::fmt::Display) -> Self {
        CliError::Backend(e.to_string())
    }
}
