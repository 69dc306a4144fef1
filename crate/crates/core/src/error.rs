use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix does not match the declared dimension.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("{what} index {index} out of range (len {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("table shape mismatch: {0}")]
    Shape(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    Degree { expected: usize, found: usize },

    #[error("{0}")]
    Precondition(String),

    #[error("chain is not a cycle")]
    NotACycle,

    #[error("complex has no 2-cells (topological view)")]
    NoTwoCells,

    #[error("nonzero curvature: the supplied connection is not closed")]
    NonzeroCurvature,

    #[error("disturbing model: contexts {first} and {second} disagree on {intersection:?}")]
    Disturbing {
        first: usize,
        second: usize,
        intersection: Vec<String>,
    },

    #[error("scale cap exceeded: {what} = {found} > {cap}")]
    ScaleCap {
        what: &'static str,
        found: usize,
        cap: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
