use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Core(#[from] fcp_core::Error),
}

pub type LabResult<T> = Result<T, LabError>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ASSERTION_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const BOX_OVERFLOW: i32 = 4;
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use fcp_core::Error as E;
        match self {
            LabError::Config(_) | LabError::Json { .. } => exit::USAGE,
            LabError::Io { .. } | LabError::Csv(_) => exit::IO,
            LabError::Core(e) => match e {
                E::InvalidModel(_) => 10,
                E::InvalidArgument(_) => 11,
                E::HorizonExhausted { .. } => 12,
                E::InvalidVariant(_) => 13,
                E::NoClosedForm(_) => 14,
                E::NonStationary(_) => 15,
                E::DensityNotMonotone { .. } => 16,
                E::UnboundedDensity => 17,
                E::UnsupportedAtom(_) => 18,
                E::ZeroAtomNotAllowed { .. } => 19,
                E::GridMismatch => 20,
                E::InsufficientGrowth { .. } => 21,
                E::TooManyTruncated { .. } => 22,
            },
        }
    }
}
