use std::path::PathBuf;

use thiserror::Error;

/// Invalid parameter or configuration values.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Failures while reading or using a policy network.
#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation at line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("dimension mismatch in layer {layer}: expected {expected}, found {found}")]
    DimensionMismatch {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite parameter in layer {layer} at index {index}")]
    NonFinite { layer: usize, index: usize },
    #[error("input length {found} does not match network input width {expected}")]
    InputLength { expected: usize, found: usize },
    #[error("all-sensors observation requires an inspection summary")]
    MissingInspection,
}
