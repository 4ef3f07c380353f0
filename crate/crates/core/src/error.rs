use std::path::PathBuf;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible charging envelope: {0}")]
    InfeasibleEnvelope(String),

    #[error("formulation error: {0}")]
    Formulation(String),

    #[error("input bundle failed validation with {} violation(s)", .0.len())]
    Validation(Vec<Violation>),

    #[error("LP data rejected: {0}")]
    InvalidLp(String),

    #[error("MPS export failed: {0}")]
    Export(String),

    #[error("solution import failed: {0}")]
    Import(String),

    #[error("no feasible point found: {0}")]
    NoFeasiblePoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Data(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
