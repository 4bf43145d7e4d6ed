use thiserror::Error;

use crate::assignment::Edge;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("instance has {agents} agents but {tasks} tasks; agents must not be fewer than tasks")]
    TooFewAgents { agents: usize, tasks: usize },

    #[error("weight on edge {edge} is not finite ({value})")]
    NonFiniteWeight { edge: Edge, value: f64 },

    #[error("edge {edge} is outside the {agents}x{tasks} instance")]
    EdgeOutOfRange {
        edge: Edge,
        agents: usize,
        tasks: usize,
    },

    #[error("no matching covers every task")]
    Infeasible,

    #[error("edge {0} is not an edge of the instance")]
    UnknownEdge(Edge),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("optimal assignment is not unique (edge {0} has zero sensitivity)")]
    DegenerateOptimum(Edge),

    #[error("reference assignment is not optimal: flipping edge {edge} lowers cost by {gap}")]
    NotOptimal { edge: Edge, gap: f64 },

    #[error("brute-force enumeration capped at {cap} tasks, instance has {tasks}")]
    CapExceeded { cap: usize, tasks: usize },

    #[error("edge sets differ: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
