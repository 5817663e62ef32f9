use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped by kind so callers (the CLI in particular) can map
/// them onto stable exit codes without string matching.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed model file: {0}")]
    MalformedFile(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("target column '{0}' not found")]
    MissingTarget(String),

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("classification target needs exactly 2 classes, found {0}")]
    ClassCount(usize),

    #[error("no usable data rows: {0}")]
    EmptyData(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("numeric breakdown at iteration {iteration}: {detail}")]
    NumericBreakdown { iteration: usize, detail: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes used by the command-line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const NUMERIC: i32 = 4;
}

impl Error {
    /// Exit code for this error: 1 usage, 2 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::InvalidArgument(_) | Self::Config(_) => exit::USAGE,
            Self::NumericBreakdown { .. } => exit::NUMERIC,
            Self::MalformedFile(_)
            | Self::VersionMismatch { .. }
            | Self::InvariantViolation(_)
            | Self::MissingTarget(_)
            | Self::MissingColumn(_)
            | Self::ClassCount(_)
            | Self::EmptyData(_)
            | Self::UndefinedMetric(_)
            | Self::Csv(_)
            | Self::Json(_)
            | Self::Io(_) => exit::DATA,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
