use std::path::PathBuf;

use thiserror::Error;

/// Everything that can stop a command, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ked_core::Error),

    #[error("{0}")]
    Input(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use ked_core::Error as E;
        match self {
            CliError::Core(E::Unsupported(_) | E::NotSampleable(_)) | CliError::Unsupported(_) => 2,
            CliError::Core(E::IllConditioned(_) | E::NumericalInconsistency(_)) => 4,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "unsupported",
            4 => "numerical_failure",
            _ => "invalid_input",
        }
    }
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}
