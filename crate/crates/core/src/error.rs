//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Schema definition or header/schema mismatch problems.
    #[error("schema error: {0}")]
    Schema(String),

    /// A malformed data row, carrying the 1-based line number of the source.
    #[error("row error at line {line}: {message}")]
    Row { line: u64, message: String },

    /// An argument outside an operation's contract (bad k, wrong gene
    /// count, X not a subset of the universe, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A requested configuration that the inputs cannot support.
    #[error("configuration error: {0}")]
    Config(String),

    /// A cell value that cannot be discretized, naming the offending record
    /// and attribute.
    #[error("range error: record {record}, attribute '{attribute}': {message}")]
    Range {
        record: usize,
        attribute: String,
        message: String,
    },

    /// An operation invoked before its prerequisites were established
    /// (e.g. selection over unevaluated fitness).
    #[error("state error: {0}")]
    State(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
