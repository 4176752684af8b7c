use thiserror::Error;

/// Exit code for malformed input or schema violations.
pub const EXIT_INVALID_INPUT: i32 = 2;
/// Exit code for numerical non-convergence or failed verification.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit code for violated mathematical preconditions.
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] tcd_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => EXIT_INVALID_INPUT,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(e) if e.is_precondition() => EXIT_PRECONDITION,
            CliError::Core(_) => EXIT_INVALID_INPUT,
        }
    }
}
