//! Error type shared by every module of the crate.

use std::io;

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
///
/// The variants map onto process exit codes (see [`Error::exit_code`]):
/// malformed or contract-violating input data exits with 1, caller mistakes
/// (bad indexes, bad flags) with 2, and filesystem trouble with 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Input bytes could not be read as the expected format (bad number,
    /// bad date, malformed CSV/JSON). The message pinpoints the offending
    /// record or cell.
    #[error("parse error: {0}")]
    Parse(String),

    /// Input parsed fine but violates a documented data contract
    /// (negative counts, empty table after pruning, degenerate cloud).
    #[error("{0}")]
    Domain(String),

    /// The caller passed an invalid argument (index out of range,
    /// impossible cut size, mismatched dimensions).
    #[error("{0}")]
    Usage(String),

    /// Underlying filesystem or stream failure.
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// Process exit code for this error: 1 for data errors, 2 for usage
    /// errors, 3 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Domain(_) => 1,
            Error::Usage(_) => 2,
            Error::Io(_) => 3,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io_err) => Error::Io(io_err),
                _ => unreachable!("is_io_error guarantees an Io kind"),
            }
        } else {
            Error::Parse(err.to_string())
        }
    }
}
