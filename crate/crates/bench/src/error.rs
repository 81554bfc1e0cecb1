use std::path::PathBuf;

use rta_core::{ConfigError, PolicyError};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Filter(#[from] ConfigError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("could not draw a safe state after {attempts} attempts; check the safety parameters and sampling ranges")]
    Rejection { attempts: usize },
    #[error("statistics need at least one sample")]
    EmptySamples,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("could not encode report for {path}: {message}")]
    Encode { path: PathBuf, message: String },
    #[error("could not parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl BenchError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
