use std::io;
use std::path::PathBuf;

use finsler_core::FinslerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The scenario could not be read or does not describe a valid run.
    #[error("configuration error in {source_name}: {message}")]
    Config { source_name: String, message: String },
    /// A computation failed, e.g. a trajectory left the chart.
    #[error("computation failed: {0}")]
    Compute(#[from] FinslerError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn config(source_name: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            source_name: source_name.into(),
            message: message.into(),
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        1
    }
}
