use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A verification or bound check failed.
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("I/O: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] zeno_dd_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            // invalid model, state or pulse inputs
            CliError::Core(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
