//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by parsing, model construction, and sampling.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed Newick input; `offset` is the byte position of the problem.
    #[error("newick parse error at byte {offset}: {message}")]
    NewickParse { offset: usize, message: String },

    /// Supplied tip dates disagree with path lengths implied by the tree.
    #[error("tip date calibration error for '{tip}': supplied {supplied}, path-implied {implied}")]
    Calibration {
        tip: String,
        supplied: f64,
        implied: f64,
    },

    /// Tree violates a structural requirement (binary, ≥2 tips, positive branch spans).
    #[error("tree shape error: {0}")]
    TreeShape(String),

    /// Malformed FASTA input; `line` is 1-based.
    #[error("fasta error at line {line}: {message}")]
    Fasta { line: usize, message: String },

    /// Malformed tip-date table; `line` is 1-based.
    #[error("date table error at line {line}: {message}")]
    DateTable { line: usize, message: String },

    /// Tree and alignment taxon sets differ.
    #[error("taxon mismatch: missing from alignment {missing_from_alignment:?}, missing from tree {missing_from_tree:?}")]
    TaxonMismatch {
        missing_from_alignment: Vec<String>,
        missing_from_tree: Vec<String>,
    },

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Vector or matrix dimensions disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numerical computation produced NaN or infinity.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Run configuration is missing or misuses a key.
    #[error("config error: {0}")]
    Config(String),

    /// An MCMC internal consistency check failed.
    #[error("sampler error: {0}")]
    Sampler(String),

    /// Trace file cannot be parsed or is too short to summarize.
    #[error("trace error: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
