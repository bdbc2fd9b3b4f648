use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("subset for part {part} is empty")]
    EmptySubset { part: usize },

    #[error("index {index} out of range for part {part} of size {size}")]
    OutOfRange { part: usize, index: usize, size: usize },

    #[error("pins must occupy distinct parts; part {part} is repeated")]
    DuplicatePart { part: usize },

    #[error("malformed edge {edge:?}: {reason}")]
    MalformedEdge { edge: Vec<usize>, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("block size {m} exceeds part size {size}")]
    BlockTooLarge { m: usize, size: usize },

    #[error("beta must lie in [0, 1/2), got {0}")]
    BetaOutOfRange(f64),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error(
        "coverage failure: {uncovered} tuples uncovered, budget {budget:.3}, after {anchors} anchors"
    )]
    Coverage {
        uncovered: usize,
        budget: f64,
        anchors: usize,
    },

    #[error("exact search over blocks of sizes {sizes:?} exceeds the enumeration cap")]
    ExactCapExceeded { sizes: Vec<usize> },

    #[error("no accepted family after {attempts} attempts; last failure: {stats}")]
    AttemptsExhausted { attempts: usize, stats: String },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("divisibility: {0}")]
    Divisibility(String),

    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    #[error("oracle: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
