use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("lattice has {size} points, enumeration limit is {limit}")]
    EnumerationLimit { size: u128, limit: u128 },

    #[error("simplex did not terminate after {0} iterations")]
    SimplexStalled(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dataset generation failed: {0}")]
    Generation(String),

    #[error("dataset file {path}: {msg}")]
    DatasetFormat { path: PathBuf, msg: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
