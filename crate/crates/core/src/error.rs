use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    NoNodes,

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge endpoint {index} out of range for a graph with {num_nodes} nodes")]
    IndexOutOfRange { index: usize, num_nodes: usize },

    #[error(
        "node {0} has degree 0; normalized operators are undefined (prune isolated nodes first)"
    )]
    IsolatedNode(usize),

    #[error("matrix is not symmetric (first mismatch at ({0}, {1}))")]
    NotSymmetric(usize, usize),

    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),

    #[error("symmetric eigensolver failed to converge")]
    EigenFailure,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("sensitive attribute at index {index} is {value}, expected -1 or +1")]
    NotBinarySensitive { index: usize, value: f64 },

    #[error("label at index {index} is {value}, expected 0 or 1")]
    NotBinaryLabel { index: usize, value: u8 },

    #[error("tau must lie in (0, 1], got {0}")]
    InvalidTau(f64),

    #[error("every frequency exceeds the cutoff (k = N = {0}); raise tau")]
    AllFrequenciesCut(usize),

    #[error("mask is empty")]
    EmptyMask,

    #[error("mask index {index} out of range for {len} nodes")]
    MaskOutOfRange { index: usize, len: usize },

    #[error("sensitive group s = {0} has no nodes in the mask")]
    EmptyGroup(i8),

    #[error("sensitive group s = {0} has no positive-label nodes in the mask")]
    EmptyPositiveGroup(i8),

    #[error("missing column `{0}` in node file")]
    MissingColumn(String),

    #[error("edge file line {line} references unknown node id `{id}`")]
    UnknownNodeId { line: usize, id: String },

    #[error("node file line {line}: sensitive value `{value}` is not 0 or 1")]
    NonBinarySensitive { line: usize, value: String },

    #[error("{file} line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("split leaves the {0} set empty")]
    TooFewNodes(&'static str),

    #[error("{variant}, split {split}: {source}")]
    InRun {
        variant: String,
        split: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure came from the filesystem rather than from bad input.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Csv(e) => e.is_io_error(),
            Error::InRun { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
