use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] repat_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("stage file: {0}")]
    StageFile(String),
    #[error("word grammar: {0}")]
    Grammar(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("certificate INVALID: failed conditions {conditions:?}")]
    CertificateInvalid { conditions: Vec<u8> },
    #[error("{failed} quantitative check(s) failed: {first}")]
    CheckFailed { failed: usize, first: String },
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// 0 success, 2 invalid certificate or builder failure, 3 failed
    /// quantitative check, 4 resource cap, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use repat_core::Error as E;
        match self {
            LabError::CertificateInvalid { .. } => 2,
            LabError::CheckFailed { .. } => 3,
            LabError::Core(e) => match e {
                E::CapExceeded { .. } | E::HorizonTooLarge { .. } | E::Overflow => 4,
                E::NoContraction { .. }
                | E::NoConvergence { .. }
                | E::DisjointnessFailure { .. }
                | E::InvalidStage { .. }
                | E::NotFound { .. } => 2,
                E::CertificationFailure { .. } | E::SpanningVerificationFailure { .. } => 3,
                _ => 1,
            },
            _ => 1,
        }
    }
}
