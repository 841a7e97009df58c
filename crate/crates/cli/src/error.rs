use std::path::PathBuf;

use thiserror::Error;

/// Exit code for bad flags, config values or missing inputs.
pub const EXIT_USAGE: u8 = 2;
/// Exit code for numerical failures (non-convergence, truncation, residues).
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit code for unreadable inputs and unwritable outputs.
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: nonclassical::Error,
    },

    #[error("{stage}: {}: {source}", path.display())]
    Io {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        use nonclassical::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Stage { source, .. } => match source {
                E::Io(_) | E::Csv(_) | E::Json(_) | E::Format { .. } => EXIT_IO,
                e if e.is_numerical() => EXIT_NUMERICAL,
                _ => EXIT_USAGE,
            },
        }
    }
}

/// Labels a library error with the pipeline stage it came from.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> StageExt<T> for nonclassical::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}
