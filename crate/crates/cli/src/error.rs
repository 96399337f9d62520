use std::path::PathBuf;

use maneuver_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Artifact { path: PathBuf, msg: String },
    #[error("{controller} ({direction}) diverged at step {step}")]
    Divergence {
        controller: String,
        direction: String,
        step: usize,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::InvalidInput(_) => 2,
                CoreError::NoAdmissibleGains { .. } => 4,
                _ => 3,
            },
            CliError::Divergence { .. } => 3,
            CliError::Io { .. } | CliError::Artifact { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
