use std::fmt;
use std::process::ExitCode;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed inputs. Exit 2.
    Validation(String),
    /// A computation produced non-finite or otherwise unusable numbers. Exit 3.
    Numeric(String),
    /// A `check` ran and its verdict was negative. Exit 4.
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::CheckFailed(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::CheckFailed(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<stiefel_polar::Error> for CliError {
    fn from(e: stiefel_polar::Error) -> Self {
        match e {
            stiefel_polar::Error::Numeric(_) | stiefel_polar::Error::NotStationary(_) => CliError::Numeric(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches the offending path to I/O and parse errors.
pub fn with_path<T, E: fmt::Display>(r: Result<T, E>, path: &std::path::Path) -> CliResult<T> {
    r.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
