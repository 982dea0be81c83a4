//! Edge partition trees (EPTs) of vertex-weighted trees.
//!
//! An EPT of a tree `G` is a rooted full binary tree whose leaves are the
//! vertices of `G` and whose internal nodes are the edges of `G`: the node for
//! edge `e` splits the vertices below it into the two components left by
//! deleting `e` from the subgraph those vertices induce. The cost of an EPT
//! (`ept_sum`) charges every edge node the total vertex weight underneath it,
//! scaled by the edge's own weight when edge weights are present.
//!
//! The crate provides:
//!
//! * [`tree`] — the input model: parsing/serialization of vertex-weighted
//!   trees, restrictions to connected subsets, component weights, centroids,
//!   and most-balanced edges.
//! * [`ept`] — the EPT model: validation, both cost definitions, the
//!   splitting transformation, and the `correctly_placed` predicate.
//! * [`aug`] — the augmentation transformation (one subdivision below every
//!   internal node, on the lighter side) and its cost.
//! * [`builder`] — balanced EPT construction: a quadratic reference
//!   recursion and an `O(n log n)` centroid/caterpillar construction that
//!   produces byte-identical output.
//! * [`oracle`] — exact optimal `ept_sum` by dynamic programming over
//!   connected vertex subsets, plus Prüfer-based tree enumeration and seeded
//!   random instances.
//! * [`harness`] — ratio sweeps, lemma audits, and construction benchmarks
//!   with deterministic CSV/JSON output.
//!
//! All costs are exact `u64` arithmetic with checked overflow; nothing in the
//! crate goes through floating point except the final decimal rendering of
//! ratios and benchmark slope fits.

pub mod aug;
pub mod builder;
pub mod ept;
pub mod error;
pub mod harness;
pub mod json;
pub mod oracle;
pub mod tree;
pub mod weight;

pub use crate::aug::{aug_sum, augment, AugNode, AugTree};
pub use crate::builder::{
    build_balanced_fast, build_balanced_naive, caterpillar_prefix, sort_incident_components,
    IncidenceEntry, SortedIncidence,
};
pub use crate::ept::{
    correctly_placed_all, correctly_placed_spot_check, ept_sum_edges, ept_sum_leaves, split,
    validate_ept, CostBreakdown, Ept, EptNode, NodeId, SplitPart,
};
pub use crate::error::{EptViolation, HarnessError, JsonError, OracleError, OverflowError, TreeError};
pub use crate::harness::{
    audit_records_csv, bench_records_csv, bench_summary_json, ratio_records_csv,
    ratio_summary_json, run_audits, run_bench, run_ratio_exhaustive, run_ratio_random, AuditCheck,
    AuditConfig, AuditRecord, BenchConfig, BenchOutcome, BenchRecord, BenchShape,
    ExhaustiveRatioConfig, RandomRatioConfig, RatioRecord, RatioSummary, RatioSweep, WeightMode,
    NAIVE_BENCH_CAP,
};
pub use crate::oracle::{
    enumerate_labeled_trees, labeled_tree_count, optimal_ept_sum, optimal_ept_sum_with_cap,
    prufer_decode, prufer_from_index, random_tree, random_weights, LabeledTrees, SplitMix64,
    DEFAULT_ORACLE_CAP, HARD_ORACLE_CAP,
};
pub use crate::tree::{CutResult, EdgeRef, InputTree, Restriction, VertexId};
pub use crate::weight::Weight;
