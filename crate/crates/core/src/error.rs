use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex {vertex} out of range (vertex_count = {vertex_count})")]
    VertexOutOfRange { vertex: u64, vertex_count: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("class ratio undefined: graph has no positive edges")]
    UndefinedRatio,

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error(
        "estimated {estimated} candidate pairs exceeds the budget of {budget}; \
         use per-source streaming evaluation instead of materializing the ranking"
    )]
    CandidateBudget { estimated: u64, budget: u64 },

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("expected a {expected} curve, got {actual}")]
    CurveKind {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("division by zero: {0}")]
    Division(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::VertexOutOfRange { .. } => "bounds",
            Error::Parameter(_) => "parameter",
            Error::UndefinedRatio => "undefined_ratio",
            Error::DegenerateSplit(_) => "degenerate_split",
            Error::CandidateBudget { .. } => "resource",
            Error::Consistency(_) => "consistency",
            Error::CurveKind { .. } => "curve_kind",
            Error::Division(_) => "division",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
