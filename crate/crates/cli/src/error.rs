use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cooling_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 for configuration problems, 3 for violated numerical invariants,
    /// 4 for an unreachable measurement outcome, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use cooling_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::MeasurementUnreachable { .. }) => 4,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(E::PositivityViolation { .. }) | CliError::Core(E::StepTooLarge { .. }) => 3,
            CliError::Core(_) => 2,
            CliError::Verify(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}
