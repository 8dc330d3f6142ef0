use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quantile level must lie strictly inside (0, 1), got {0}")]
    InvalidQuantileLevel(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("sample is not sorted in nondecreasing order")]
    UnsortedSample,

    #[error("degenerate location difference")]
    DegenerateDirection,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty class {0}")]
    EmptyClass(usize),

    #[error("fold degenerate: class absent")]
    FoldDegenerate,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scale matrix is not positive semidefinite")]
    NotPositiveSemidefinite,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end: 2 for numerical
    /// failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::NotPositiveSemidefinite => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
