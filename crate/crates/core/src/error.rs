use std::io;

use thiserror::Error;

use crate::rdf_io::{ParseError, Term};
use crate::summary::{DigestKind, EqcId, ModelKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("vertex {0} is not in the graph")]
    UnknownVertex(Term),

    #[error("{0} is not a member of the summary")]
    UnknownMember(Term),

    #[error("no equivalence class with id {0}")]
    UnknownEqc(EqcId),

    #[error("equivalence class {0} still has members and cannot be removed")]
    NonEmptyEqc(EqcId),

    #[error("summary model mismatch: {left} vs {right}")]
    ModelMismatch { left: ModelKind, right: ModelKind },

    #[error("summary digest mismatch: {left} vs {right}")]
    DigestMismatch { left: DigestKind, right: DigestKind },

    #[error("corrupt summary: {0}")]
    Corruption(String),

    #[error("malformed graph data: {0}")]
    Malformed(String),

    #[error("malformed summary file: {0}")]
    SummaryFormat(String),

    #[error("no input summaries")]
    EmptyInput,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

impl Error {
    /// True for errors caused by the caller's configuration rather than by the data.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::ModelMismatch { .. }
                | Error::DigestMismatch { .. }
                | Error::EmptyInput
                | Error::InvalidParams(_)
        )
    }
}
