use std::path::PathBuf;

use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variants are grouped by where they originate so the CLI can map them onto
/// exit codes (see [`Error::kind`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("value {value} at index {index} is outside the Box-Cox domain for lambda = {lambda}")]
    BoxCoxDomain {
        index: usize,
        value: f64,
        lambda: f64,
    },

    #[error("series too short: {what} needs at least {needed} observations, got {got}")]
    TooShort {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("AR polynomial is not stationary")]
    NonStationary,

    #[error("MA polynomial is not invertible")]
    NonInvertible,

    #[error("optimizer did not converge after {evaluations} evaluations")]
    NoConvergence { evaluations: usize },

    #[error("coefficient covariance unavailable (Hessian not invertible)")]
    CovarianceUnavailable,

    #[error("no candidate survived selection: {0}")]
    SelectionFailed(String),

    #[error("{stage} stage failed: {source}. hint: {hint}")]
    Stage {
        stage: &'static str,
        hint: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("cannot write report output {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Broad failure category, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::Config,
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::InvalidSeries(_)
            | Error::BoxCoxDomain { .. }
            | Error::TooShort { .. }
            | Error::ZeroVariance
            | Error::Output { .. } => ErrorKind::Data,
            Error::Numerical(_)
            | Error::NonStationary
            | Error::NonInvertible
            | Error::NoConvergence { .. }
            | Error::CovarianceUnavailable
            | Error::SelectionFailed(_) => ErrorKind::Numeric,
            Error::Stage { source, .. } => source.kind(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str, hint: &'static str) -> Error {
        Error::Stage {
            stage,
            hint,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
