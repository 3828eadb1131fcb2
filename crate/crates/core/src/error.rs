use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("self-loop on node {node} at line {line}")]
    SelfLoop { line: usize, node: String },

    #[error("layer {order} does not exist (max order is {max_order})")]
    MissingLayer { order: usize, max_order: usize },

    #[error("hub and fringe order must differ, got {0} for both")]
    SameOrder(usize),

    #[error("layer {order} would hold {count} simplices, over the cap of {cap}")]
    LayerCap { order: usize, count: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("unknown centrality metric `{0}`")]
    UnknownMetric(String),

    #[error("node {0} has no feature row")]
    MissingNodeRow(usize),

    #[error("epidemic threshold undefined: <k^2> equals <k> ({0})")]
    ThresholdUndefined(f64),

    #[error("invalid diffusion parameters: {0}")]
    Diffusion(String),

    #[error("invalid seed set: {0}")]
    Seeds(String),

    #[error("simplex {0:?} is not in the complex")]
    UnknownSimplex(Vec<usize>),

    #[error("id {0} has no observed score")]
    Unobserved(usize),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }
}
