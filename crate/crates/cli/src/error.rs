use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes. Clap usage errors also exit with [`exit::CONFIG`].
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const UNSUPPORTED_REGIME: i32 = 3;
    pub const SWEEP_FAILURE: i32 = 4;
    pub const NUMERICAL: i32 = 5;
    pub const IO: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Unknown, missing or ill-typed key.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Module(#[from] wavelab::Error),

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use wavelab::Error as E;
        match self {
            CliError::Config { .. } => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Module(e) => match e {
                E::UnsupportedRegime(_) => exit::UNSUPPORTED_REGIME,
                E::SweepFailed(_) | E::InsufficientData(_) | E::IncomparableSweeps(_) => {
                    exit::SWEEP_FAILURE
                }
                E::Numerical(_) | E::Support(_) => exit::NUMERICAL,
                E::Io(_) => exit::IO,
                _ => exit::CONFIG,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
