use std::path::PathBuf;

/// Errors raised by the library.
///
/// Variants fall into four families which the command-line front end maps to
/// exit codes: validation problems, numeric verification failures, numeric
/// breakdowns and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("partition is not a control equivalence (deviation {deviation:e})")]
    NotControlEquivalence { deviation: f64 },

    #[error("control channel {channel} at step {step} is outside [{lo}, {hi}]: {value}")]
    OutOfBounds {
        channel: usize,
        step: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite state at step {step}")]
    Divergence { step: usize },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::NotControlEquivalence { .. } | Error::Verification(_) => ErrorKind::Verification,
            Error::Divergence { .. } => ErrorKind::Verification,
            Error::Csv(e) if e.is_io_error() => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Verification,
    Io,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
