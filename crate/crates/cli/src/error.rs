use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use disloc_analytics::AnalyticsError;
use disloc_core::{DetectError, FeedError, PipelineError, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Bad command line.
    Usage,
    /// An input file or directory is missing or unreadable.
    Missing,
    /// Malformed input content.
    Format,
    /// Broken invariant, or an output that could not be written.
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Usage | Kind::Missing => 2,
            Kind::Format => 3,
            Kind::Internal => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Kind::Usage => "usage",
            Kind::Missing => "missing",
            Kind::Format => "format",
            Kind::Internal => "internal",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub file: Option<PathBuf>,
    pub line: Option<u64>,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        CliError { kind, file: None, line: None, message: message.into() }
    }

    pub fn missing(path: &Path, message: impl Into<String>) -> Self {
        Self::new(Kind::Missing, message).at(path, None)
    }

    pub fn format(path: &Path, line: Option<u64>, message: impl Into<String>) -> Self {
        Self::new(Kind::Format, message).at(path, line)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(Kind::Internal, message)
    }

    /// Failure writing an output artifact.
    pub fn output(path: &Path, e: io::Error) -> Self {
        Self::new(Kind::Internal, format!("cannot write output: {e}")).at(path, None)
    }

    fn at(mut self, path: &Path, line: Option<u64>) -> Self {
        self.file = Some(path.to_path_buf());
        self.line = line;
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

/// One line: `error code=<n> kind=<kind> [file=<path>] [line=<n>] message=<text>`.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error code={} kind={}", self.exit_code(), self.kind.tag())?;
        if let Some(p) = &self.file {
            write!(f, " file={}", p.display())?;
        }
        if let Some(l) = self.line {
            write!(f, " line={l}")?;
        }
        write!(f, " message={}", self.message.replace('\n', " "))
    }
}

impl From<FeedError> for CliError {
    fn from(e: FeedError) -> Self {
        match e {
            FeedError::Io { path, source } => CliError::missing(&path, source.to_string()),
            FeedError::Parse { path, line, error } => CliError::format(&path, Some(line), error.to_string()),
            FeedError::Header { path, line, message } | FeedError::Meta { path, line, message } => {
                CliError::format(&path, Some(line), message)
            }
            FeedError::Unsorted { path, line, ts, prev } => {
                CliError::format(&path, Some(line), format!("timestamp {ts} precedes previous {prev}"))
            }
            FeedError::Invalid { path, line, message } => CliError::format(&path, Some(line), message),
        }
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::SessionEndTooEarly { .. } => CliError::new(Kind::Format, e.to_string()),
            DetectError::TimestampRegression { .. } => CliError::internal(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Feed(e) => e.into(),
            PipelineError::Detect(e) => e.into(),
            PipelineError::Input(m) => CliError::new(Kind::Format, m),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(m) => CliError::new(Kind::Format, m),
            SimError::Io { path, source } => CliError::output(&path, source),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        CliError::new(Kind::Format, e.to_string())
    }
}
