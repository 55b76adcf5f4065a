use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad input: {0}")]
    BadInput(String),

    #[error("{0}")]
    Domain(cquant::Error),

    #[error("{0}")]
    Unsupported(cquant::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::BadInput(_) | CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Unsupported(_) => 4,
        })
    }

    /// Classifies a library error raised while building the problem from
    /// user input: anything but an unsupported closed form is bad input.
    pub fn input(e: cquant::Error) -> Self {
        match e {
            cquant::Error::Unsupported { .. } => CliError::Unsupported(e),
            other => CliError::BadInput(other.to_string()),
        }
    }

    /// Classifies a library error raised by the solver or the estimators.
    pub fn run(e: cquant::Error) -> Self {
        match e {
            cquant::Error::Unsupported { .. } => CliError::Unsupported(e),
            other => CliError::Domain(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
