use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),

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

    #[error("malformed table {path}: {msg}")]
    Table { path: PathBuf, msg: String },

    #[error("no trajectories for {0}")]
    EmptyCell(String),

    #[error("nothing to plot: {0}")]
    EmptyPlot(String),

    #[error(transparent)]
    Core(#[from] anastaars_core::Error),
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        BenchError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn table(path: &Path, msg: impl Into<String>) -> Self {
        BenchError::Table {
            path: path.to_path_buf(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
