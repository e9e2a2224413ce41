use thiserror::Error;

use crate::graph::{Edge, Vertex};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("cover edge {0:?} lies inside a single component")]
    Contract(Edge),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("structure violated: {0}")]
    Structure(String),

    #[error("factor instance is infeasible")]
    Infeasible,

    #[error("search budget exceeded: {0}")]
    Budget(BudgetExceeded),

    #[error("iteration bound of {bound} exceeded in {stage}")]
    IterationBound { stage: &'static str, bound: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("vertex {0} is not an anchor")]
    NotAnchor(Vertex),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BudgetExceeded {
    #[error("{n} vertices exceed the cap of {cap}")]
    Vertices { n: usize, cap: usize },
    #[error("more than {0} search nodes expanded")]
    Nodes(u64),
    #[error("time limit of {0} ms reached")]
    Time(u64),
}
