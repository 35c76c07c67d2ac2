use std::fmt;
use std::path::Path;

use rpdhg_core::Error as CoreError;

/// Process exit status of the `rpdhg` binary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Config = 2,
    Numerical = 3,
    Io = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("numerical anomaly: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::Config,
            CliError::Numerical(_) => ExitCode::Numerical,
            CliError::Io(_) => ExitCode::Io,
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if e.is_numerical_anomaly() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_codes() {
        let ls: CliError = CoreError::LineSearch { backtracks: 100, tau: 1e-9 }.into();
        assert_eq!(ls.exit_code(), ExitCode::Numerical);
        let nf: CliError = CoreError::NonFinite("x".into()).into();
        assert_eq!(nf.exit_code(), ExitCode::Numerical);
        let p: CliError = CoreError::Parameter("bad".into()).into();
        assert_eq!(p.exit_code(), ExitCode::Config);
        assert_eq!(CliError::io(Path::new("/x"), "gone").exit_code() as i32, 4);
    }
}
