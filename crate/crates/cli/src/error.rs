use std::path::{Path, PathBuf};

use baltor_core::Error as CoreError;

/// CLI-level error with a stable exit-code mapping:
/// 0 success, 1 violated oracle bounds, 2 missing/invalid input,
/// 3 empty calibration set, 4 schema mismatch, 5 oracle size bound.
#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    MissingInput(PathBuf),
    EmptyCalibration(PathBuf),
    Schema(String),
    Usage(String),
    OracleBound(String),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(msg.into())
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingInput(path.to_path_buf())
        } else {
            CliError::Io(path.to_path_buf(), err)
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::OracleBound(_) => 1,
            CliError::MissingInput(_) | CliError::Usage(_) | CliError::Io(_, _) => 2,
            CliError::EmptyCalibration(_) => 3,
            CliError::Schema(_) => 4,
            CliError::Core(e) => match e {
                CoreError::Format { .. } => 4,
                CoreError::EmptyCalibration => 3,
                CoreError::WorldTooLarge { .. } => 5,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::MissingInput(p) => write!(f, "missing input: {}", p.display()),
            CliError::EmptyCalibration(p) => {
                write!(f, "calibration file {} yields no pairs", p.display())
            }
            CliError::Schema(msg) => write!(f, "schema mismatch: {msg}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::OracleBound(msg) => write!(f, "oracle bounds violated: {msg}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
