use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Symbol, Timestamp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid price {0:?}")]
    BadPrice(String),
    #[error("invalid symbol {0:?}")]
    BadSymbol(String),
    #[error("invalid exchange id {0:?}")]
    BadExchange(String),
    #[error("unknown category {0:?}")]
    BadCategory(String),
}

/// A single malformed event record.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{field}: {message} (byte {offset})")]
pub struct ParseError {
    pub field: &'static str,
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum FeedError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {error}")]
    Parse { path: PathBuf, line: u64, error: ParseError },
    #[error("{path}:{line}: {message}")]
    Header { path: PathBuf, line: u64, message: String },
    #[error("{path}:{line}: timestamp {ts} precedes previous {prev}")]
    Unsorted { path: PathBuf, line: u64, ts: u64, prev: u64 },
    #[error("{path}:{line}: invalid event: {message}")]
    Invalid { path: PathBuf, line: u64, message: &'static str },
    #[error("{path}:{line}: {message}")]
    Meta { path: PathBuf, line: u64, message: String },
}

impl FeedError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        FeedError::Io { path: path.into(), source }
    }

    /// True for malformed content (as opposed to I/O failure).
    pub fn is_format(&self) -> bool {
        !matches!(self, FeedError::Io { .. })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DetectError {
    #[error("{symbol}: timestamp regression {ts} after {prev}")]
    TimestampRegression { symbol: Symbol, ts: Timestamp, prev: Timestamp },
    #[error("session end {end} precedes last step {last}")]
    SessionEndTooEarly { end: Timestamp, last: Timestamp },
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Feed(#[from] FeedError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("{0}")]
    Input(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}
