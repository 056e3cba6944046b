use std::path::Path;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration, flags or inputs that exist but do not check out.
    #[error("{0}")]
    Validation(String),
    /// A required input, usually an earlier stage's output, is absent.
    #[error("{0}")]
    Missing(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Missing(_) => 2,
        }
    }

    pub fn missing(what: &str, path: &Path) -> Self {
        CliError::Missing(format!("{what} not found: {}", path.display()))
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::Missing(format!("{}: {e}", path.display()))
        } else {
            CliError::Validation(format!("{}: {e}", path.display()))
        }
    }
}

impl From<tm_novelty::Error> for CliError {
    fn from(e: tm_novelty::Error) -> Self {
        match &e {
            tm_novelty::Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                CliError::Missing(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
