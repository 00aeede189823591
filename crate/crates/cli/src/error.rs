use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Check(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// Validation error for a named parameter.
    pub(crate) fn field(name: &str, err: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{name}: {err}"))
    }
}

impl From<relclock::Error> for CliError {
    fn from(err: relclock::Error) -> Self {
        CliError::Validation(err.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
