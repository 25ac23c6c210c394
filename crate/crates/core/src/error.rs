use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("unknown instance format version {0}")]
    UnknownVersion(u64),

    #[error("tree validation failed: {0}")]
    InvalidTree(String),

    #[error("topology validation failed: {0}")]
    InvalidTopology(String),

    #[error("search exhausted: source {source_id} cannot reach any registered target (sources still live: {live:?})")]
    Unreachable { source_id: usize, live: Vec<usize> },

    #[error("vertex {0} unreachable from the required terminals")]
    UnreachableVertex(VertexId),

    #[error("duplicate source id {0}")]
    DuplicateSource(usize),

    #[error("source {0} is not live")]
    UnknownSource(usize),

    #[error("instance too large for the exact oracle: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
