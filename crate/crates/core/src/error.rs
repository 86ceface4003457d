use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Fatal input errors. Anything recoverable is reported as a
/// [`Diagnostic`](crate::diagnostic::Diagnostic) instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no manifest.xml in package directory {0}")]
    MissingManifest(PathBuf),

    #[error("{file}:{line}: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },

    #[error("duplicate method {signature}")]
    DuplicateMethod { signature: String },

    #[error("unknown policy claim `{0}`")]
    UnknownClaim(String),

    #[error("policy declares no claims")]
    EmptyPolicy,

    #[error("malformed url `{0}`")]
    MalformedUrl(String),

    #[error("no finding with id `{0}` in report")]
    UnknownFindingId(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(file: impl Into<String>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
