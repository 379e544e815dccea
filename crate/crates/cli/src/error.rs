use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or inconsistent run specification.
    #[error("invalid specification: {0}")]
    Spec(String),

    #[error(transparent)]
    Core(#[from] hunter_saxton::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// A member run of a batch command failed.
    #[error("{label}: {source}")]
    Member {
        label: String,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    /// Process exit code: 2 spec error, 3 solver failure, 4 I/O error.
    pub fn exit_code(&self) -> u8 {
        use hunter_saxton::Error as E;
        match self {
            CliError::Spec(_) => 2,
            CliError::Core(e) => match e {
                E::Parameter(_) | E::Format { .. } | E::Domain(_) => 2,
                E::Io { .. } => 4,
                _ => 3,
            },
            CliError::Io { .. } | CliError::Csv { .. } => 4,
            CliError::Member { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn spec<T>(message: impl Into<String>) -> Result<T> {
    Err(CliError::Spec(message.into()))
}
