use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Where in an input file a problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Line(u64),
    Byte(u64),
    Row(usize),
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Location::Line(l) => write!(f, "line {l}"),
            Location::Byte(b) => write!(f, "byte offset {b}"),
            Location::Row(r) => write!(f, "row {r}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, left is {left:?}, right is {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("numerical failure at node {node} (iteration {iteration}): {detail}")]
    NumericalFailure {
        node: usize,
        iteration: usize,
        detail: String,
    },

    #[error("node `{node}` has a zero-norm feature vector")]
    ZeroNorm { node: String },

    #[error("pooled vectors average to a zero-norm mean")]
    ZeroMean,

    #[error("node `{node}` has non-unit norm {norm}")]
    NotUnitNorm { node: String, norm: f64 },

    #[error("node id lists diverge at position {index}: `{left}` vs `{right}`")]
    NodeIdMismatch {
        index: usize,
        left: String,
        right: String,
    },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("node `{node}` has an all-zero assignment row")]
    ZeroRow { node: String },

    #[error("unknown verb `{verb}` referenced by node `{node}`")]
    UnknownVerb { node: String, verb: String },

    #[error("sense `{sense}` is not a candidate of verb `{verb}` (node `{node}`)")]
    SenseNotCandidate {
        node: String,
        verb: String,
        sense: String,
    },

    #[error("node `{node}` has no ground-truth sense")]
    MissingTruth { node: String },

    #[error("no prediction for node `{node}`")]
    MissingPrediction { node: String },

    #[error("no sense embedding for ({verb}, {sense})")]
    MissingSenseEmbedding { verb: String, sense: String },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("unknown modality tag `{0}`")]
    UnknownModality(String),

    #[error("{path}: {location}: {message}")]
    Format {
        path: PathBuf,
        location: Location,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("experiment cell (lpc={lpc}, seed={seed}, class={class}): {source}")]
    Cell {
        lpc: usize,
        seed: u64,
        class: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True when the failure came from the dynamics rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalFailure { .. } => true,
            Error::Cell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, location: Location, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            location,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
