use std::path::PathBuf;

use thiserror::Error;

use crate::model::MappingCoefficients;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: column `{column}`: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: String,
        message: String,
    },

    #[error("duplicate clip ids: {}", .0.join(", "))]
    DuplicateClipIds(Vec<String>),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("length mismatch: {left} labels vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no clip reached {min_votes} votes ({excluded} clips excluded)")]
    EmptyAggregation { min_votes: usize, excluded: usize },

    #[error("predictions for `{model_id}` on `{dataset}` are missing clips: {}", .missing.join(", "))]
    Coverage {
        model_id: String,
        dataset: String,
        missing: Vec<String>,
    },

    #[error("unsupported audio encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("signal has zero power: {0}")]
    ZeroPower(String),

    #[error("mapping solver did not converge: {reason}")]
    SolverNonConvergence {
        reason: String,
        best_feasible: MappingCoefficients,
    },

    #[error("adapter `{command}` failed: {reason}\n{diagnostics}")]
    Adapter {
        command: String,
        reason: String,
        diagnostics: String,
    },

    #[error("audio file {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the environment (files, subprocesses)
    /// rather than by the content of the inputs.
    pub fn is_environmental(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Adapter { .. } => true,
            Error::Wav { source, .. } => matches!(source, hound::Error::IoError(_)),
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
