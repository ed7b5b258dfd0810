use std::path::PathBuf;

/// Errors produced by the core library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("tensor format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("video has no frames")]
    EmptyVideo,

    #[error("degenerate schedule: {0}")]
    Schedule(String),

    #[error("noise predictor failed at step {step}: {reason}")]
    Predictor { step: usize, reason: String },

    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("empty feature set")]
    EmptyFeatureSet,

    #[error("labels contain a single class")]
    SingleClass,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {reason}", path.display())]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(offset: u64, reason: impl Into<String>) -> Self {
        Error::Format {
            offset,
            reason: reason.into(),
        }
    }

    /// True for failures originating in a noise predictor (local or remote).
    pub fn is_predictor(&self) -> bool {
        match self {
            Error::Predictor { .. } | Error::Protocol(_) => true,
            Error::Frame { source, .. } => source.is_predictor(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
