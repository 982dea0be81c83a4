use thiserror::Error;

use crate::tree::{EdgeRef, VertexId};

/// Checked weight arithmetic overflowed `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("weight arithmetic overflowed u64")]
pub struct OverflowError;

/// Errors from parsing, constructing, or querying an input tree.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("tree must have at least one vertex")]
    NoVertices,
    #[error("vertex {v} out of range for n={n}")]
    VertexOutOfRange { v: u64, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0}")]
    DuplicateEdge(EdgeRef),
    #[error("expected {expected} edges, found {found}")]
    WrongEdgeCount { expected: usize, found: usize },
    #[error("expected {expected} vertex weights, found {found}")]
    WrongWeightCount { expected: usize, found: usize },
    #[error("a Pruefer sequence for n={n} must have {expected} entries, found {found}")]
    PruferLength {
        n: usize,
        expected: usize,
        found: usize,
    },
    #[error("bad weight range [{lo}, {hi}]: need 1 <= lo <= hi")]
    WeightRange { lo: u64, hi: u64 },
    #[error("edges do not form a connected tree")]
    Disconnected,
    #[error("total vertex weight overflows u64")]
    WeightOverflow,
    #[error("total vertex weight must be positive")]
    ZeroTotalWeight,
    #[error("edge weight on {0} must be at least 1")]
    ZeroEdgeWeight(EdgeRef),
    #[error("{0} is not an edge of the tree")]
    NotAnEdge(EdgeRef),
    #[error("restriction is empty")]
    EmptyRestriction,
    #[error("restriction has fewer than 2 vertices, no edge exists")]
    RestrictionTooSmall,
    #[error("vertex {0} repeated in restriction")]
    DuplicateInRestriction(VertexId),
    #[error("edge {0} does not lie inside the restriction")]
    EdgeNotInRestriction(EdgeRef),
    #[error("restriction does not induce a connected subtree")]
    DisconnectedRestriction,
}

/// First violated EPT invariant, reported by `validate_ept`.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EptViolation {
    #[error("broken node structure: {0}")]
    BrokenArena(String),
    #[error("leaves do not biject with the tree's vertices: {0}")]
    LeafBijection(String),
    #[error("internal nodes do not biject with the tree's edges: {0}")]
    EdgeBijection(String),
    #[error("node {node} (edge {edge}) does not split its subgraph into the components left by deleting its edge: {detail}")]
    Partition {
        node: usize,
        edge: EdgeRef,
        detail: String,
    },
    #[error("node {node}: children out of canonical order (left must hold the smaller minimum vertex)")]
    ChildOrder { node: usize },
}

/// Errors from the EPT JSON reader.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("byte {at}: {msg}")]
    Syntax { at: usize, msg: String },
    #[error("subdivision nodes are not allowed here")]
    UnexpectedSubdiv,
}

/// Errors from the exact oracle.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {n} vertices, above the oracle cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Overflow(#[from] OverflowError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Errors from experiment runs.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad experiment configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Overflow(#[from] OverflowError),
    #[error("instance {instance_id} falsified {check}: {detail}")]
    Violation {
        check: String,
        instance_id: String,
        detail: String,
        /// The offending instance in tree file format.
        tree_text: String,
    },
}
