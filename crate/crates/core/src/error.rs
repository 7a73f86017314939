use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data quality: {0}")]
    DataQuality(String),

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("non-finite loss at iteration {iteration} (batch seed {batch_seed}): ce={loss_ce}, sim={loss_sim}")]
    NonFiniteLoss {
        iteration: u64,
        batch_seed: u64,
        loss_ce: f32,
        loss_sim: f32,
    },

    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },

    #[error(transparent)]
    Parse(#[from] FormatError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

/// Errors raised while decoding the binary volume and checkpoint formats.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic at offset {offset}: expected {expected:?}, found {found:?}")]
    BadMagic {
        offset: usize,
        expected: [u8; 4],
        found: Vec<u8>,
    },

    #[error("unsupported version {found} at offset {offset} (expected {expected})")]
    UnsupportedVersion {
        offset: usize,
        expected: u32,
        found: u32,
    },

    #[error("unknown dtype tag {found} at offset {offset}")]
    BadDtype { offset: usize, found: u8 },

    #[error("truncated payload: needed {needed} bytes at offset {offset}, {available} available")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },

    #[error("dimension overflow: {dims:?} does not fit in addressable memory")]
    DimensionOverflow { dims: Vec<u64> },

    #[error("{count} trailing bytes after offset {offset}")]
    TrailingBytes { offset: usize, count: usize },

    #[error("label value {found} at offset {offset} is not 0 or 1")]
    InvalidLabel { offset: usize, found: u8 },

    #[error("invalid field at offset {offset}: {reason}")]
    InvalidField { offset: usize, reason: String },
}
