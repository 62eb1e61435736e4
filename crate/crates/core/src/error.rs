use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("infeasible edge count: {num_edges} edges requested on {num_nodes} nodes")]
    InfeasibleEdgeCount { num_nodes: usize, num_edges: usize },

    #[error("label {label} of node {node} is outside the vocabulary of size {vocab}")]
    LabelOutOfRange { node: usize, label: usize, vocab: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid architecture config: {0}")]
    InvalidConfig(String),

    #[error("simulation exceeded its {limit}-cycle watchdog (deadlock?) in {context}")]
    Deadlock { context: String, limit: u64 },

    #[error(
        "read-after-write hazard on {buffer} row {row} chunk {chunk}: \
         update at cycle {cycle} only {gap} cycles after the previous one (latency {latency})"
    )]
    RawHazard {
        buffer: &'static str,
        row: usize,
        chunk: usize,
        cycle: u64,
        gap: u64,
        latency: u64,
    },

    #[error("empty query list")]
    EmptyQueryList,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
