use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the design, analysis and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A construction procedure could not produce a valid object.
    #[error("construction error: {0}")]
    Construction(String),

    /// An index is out of range.
    #[error("index error: {index} is outside 0..{len}")]
    Index { index: usize, len: usize },

    /// A numeric argument lies outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two codewords expected to differ are identical.
    #[error("degenerate pair: the two codewords are identical")]
    DegeneratePair,

    /// Inputs violate a structural requirement (dimensions, duplicates, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A persisted document violates a named invariant.
    #[error("invariant violated: {name}: {detail}")]
    Invariant { name: &'static str, detail: String },

    /// A persisted document cannot be parsed.
    #[error("malformed document: {0}")]
    Format(String),

    /// A persisted document has an unsupported schema version.
    #[error("schema mismatch: found version {found}, supported {supported}")]
    Schema { found: u32, supported: u32 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Construction(_) => "construction",
            Error::Index { .. } => "index",
            Error::Domain(_) => "domain",
            Error::DegeneratePair => "degenerate-pair",
            Error::Validation(_) => "validation",
            Error::Invariant { .. } => "invariant",
            Error::Format(_) => "format",
            Error::Schema { .. } => "schema",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
