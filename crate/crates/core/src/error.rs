use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("source {source_index} seeds {used} nodes but its budget is {budget}")]
    BudgetViolation {
        source_index: usize,
        used: usize,
        budget: usize,
    },

    #[error("seeding has {got} source sets, instance has {expected} sources")]
    SourceCountMismatch { expected: usize, got: usize },

    #[error("node {node} is out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("cannot assign {nodes} nodes to sources with total budget {capacity}")]
    InfeasiblePartition { nodes: usize, capacity: usize },

    #[error("brute force would enumerate {count} seedings, cap is {cap}")]
    CombinatorialCap { count: u128, cap: u128 },

    #[error("instance with {n} nodes exceeds the size guard of {limit}; force to override")]
    SizeGuard { n: usize, limit: usize },

    #[error("sources are not identical: {0}")]
    NonIdenticalSources(String),

    #[error("across-group trust {value} falls outside [0, 1] (within-group arc fraction {within_fraction})")]
    UnsolvableTrust { value: f64, within_fraction: f64 },

    #[error("scenario {scenario}: {inner}")]
    Scenario { scenario: String, inner: Box<Error> },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
