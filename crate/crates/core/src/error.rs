use thiserror::Error;

use crate::instance::{Link, NodeId, TreeEdge};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("not a tree: {0}")]
    NotATree(String),

    #[error("infeasible instance: {} tree edge(s) uncovered: {}", .uncovered.len(), fmt_edges(.uncovered))]
    Infeasible { uncovered: Vec<TreeEdge> },

    #[error("link {0} is not part of the instance")]
    UnknownLink(Link),

    #[error("link {0} has no leaf endpoint")]
    NoLeafEndpoint(Link),

    #[error("leaf {0} has no incident link")]
    LeafUncovered(NodeId),

    #[error("graph has no perfect matching")]
    NoPerfectMatching,

    #[error("instance has {leaves} leaves, more than the enumeration cap of {cap}")]
    TooManyLeaves { leaves: usize, cap: usize },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("instance too large for the oracle: {0}")]
    OracleTooLarge(String),

    #[error("invalid rho {0}: must be at least 3/2")]
    InvalidRho(String),

    #[error("invalid generator spec: {0}")]
    InvalidGenSpec(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant violated at step {step}: {detail}")]
    Invariant { step: usize, detail: String },
}

fn fmt_edges(edges: &[TreeEdge]) -> String {
    edges
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
