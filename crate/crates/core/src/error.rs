use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A text input (dataset, world file, policy record) failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An input file had the right syntax but the wrong shape
    /// (e.g. a score file whose line count does not match the dataset).
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    /// A caller-supplied argument violated an operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The tie parameter is undefined when every pair is tied.
    #[error("cannot estimate tie parameter: no untied pairs")]
    AllPairsTied,

    /// Calibration was requested on an empty pair set.
    #[error("empty calibration set")]
    EmptyCalibration,

    /// Selective risk is undefined when the selection covers no mass.
    #[error("selective risk is undefined at zero coverage")]
    ZeroCoverage,

    /// The exhaustive search is bounded; larger worlds have no oracle.
    #[error("world has {m} states; exhaustive search is bounded at {max}")]
    WorldTooLarge { m: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
