use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// The variants map onto the CLI exit-code families through
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported or corrupt image {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("codec error: {0}")]
    Codec(String),

    #[error("image {width}x{height} is smaller than the 16x16 pyramid footprint")]
    InputTooSmall { width: usize, height: usize },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    /// No reference keypoint falls in the common region, so the ratio has
    /// no denominator.
    #[error("repeatability undefined: no reference keypoints in the common region")]
    UndefinedScore,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("every score at step {step_amount} is missing")]
    DegenerateColumn { step_amount: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error: 2 configuration/parse, 3 I/O,
    /// 4 degenerate data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::DegenerateColumn { .. } => 4,
            _ => 2,
        }
    }
}
