use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] ehsense_core::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Csv { .. } => "csv",
            CliError::Config(_) => "config",
            CliError::Model(_) => "model",
        }
    }

    /// One-line JSON rendering for stderr.
    pub fn machine_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.kind(),
            message: self.to_string(),
        })
        .expect("plain strings serialize")
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
