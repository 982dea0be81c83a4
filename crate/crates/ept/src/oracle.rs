//! Exact minimum EPT cost, plus the instance generators the experiments use.
//!
//! The oracle runs dynamic programming over connected vertex subsets encoded
//! as bitmasks: the best cost of a subset tries every edge inside it as the
//! root cut. That is exponential in n, so calls are capped — 20 by default,
//! 64 ever (the mask width).

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use crate::ept::{Ept, EptNode, NodeId};
use crate::error::{OracleError, OverflowError, TreeError};
use crate::tree::{EdgeRef, InputTree, VertexId};
use crate::weight::Weight;

pub const DEFAULT_ORACLE_CAP: usize = 20;
pub const HARD_ORACLE_CAP: usize = 64;

/// splitmix64: tiny, seedable, and identical everywhere, which keeps every
/// experiment reproducible from its printed seed.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        mix(self.state)
    }

    /// Uniform draw from `0..bound` by rejection, so small bounds carry no
    /// modulo bias.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let threshold = bound.wrapping_neg() % bound; // 2^64 mod bound
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Memo keys are single u64 masks; mixing them beats hashing their bytes.
#[derive(Default)]
struct MaskHasher(u64);

impl Hasher for MaskHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = mix(self.0 ^ b as u64);
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = mix(x);
    }
}

pub fn optimal_ept_sum(g: &InputTree) -> Result<(Weight, Ept), OracleError> {
    optimal_ept_sum_with_cap(g, DEFAULT_ORACLE_CAP)
}

/// Minimum EPT cost and one tree attaining it (ties resolved toward the
/// lexicographically smallest root edge, recursively).
pub fn optimal_ept_sum_with_cap(g: &InputTree, cap: usize) -> Result<(Weight, Ept), OracleError> {
    let cap = cap.min(HARD_ORACLE_CAP);
    if g.n() > cap {
        return Err(OracleError::CapExceeded { n: g.n(), cap });
    }
    if g.n() == 1 {
        return Ok((Weight::ZERO, Ept::single_leaf(VertexId(0))));
    }
    let full = if g.n() == 64 {
        u64::MAX
    } else {
        (1u64 << g.n()) - 1
    };
    let mut solver = Solver {
        g,
        memo: HashMap::default(),
    };
    let cost = solver.solve(full)?;
    let mut nodes = Vec::with_capacity(2 * g.n() - 1);
    let root = solver.rebuild(full, &mut nodes);
    Ok((Weight::new(cost), Ept::from_parts(nodes, root)))
}

struct Solver<'a> {
    g: &'a InputTree,
    memo: HashMap<u64, (u64, EdgeRef), BuildHasherDefault<MaskHasher>>,
}

impl Solver<'_> {
    fn solve(&mut self, mask: u64) -> Result<u64, OracleError> {
        if mask.count_ones() == 1 {
            return Ok(0);
        }
        if let Some(&(cost, _)) = self.memo.get(&mask) {
            return Ok(cost);
        }
        let mut w_s = 0u64;
        let mut bits = mask;
        while bits != 0 {
            let v = bits.trailing_zeros();
            bits &= bits - 1;
            w_s = w_s
                .checked_add(self.g.vertex_weight(VertexId(v)).get())
                .ok_or(OracleError::Overflow(OverflowError))?;
        }
        let mut best: Option<(u64, EdgeRef)> = None;
        for (eid, &e) in self.g.edges().iter().enumerate() {
            if mask & (1 << e.u().0) == 0 || mask & (1 << e.v().0) == 0 {
                continue;
            }
            let s1 = self.side_mask(mask, e.u(), eid);
            debug_assert_eq!(s1 & (1 << e.v().0), 0, "an edge always separates");
            let s2 = mask ^ s1;
            let x_e = self.g.edge_weight(e).expect("edge of the tree").get();
            let sub = self.solve(s1)?.checked_add(self.solve(s2)?);
            let cost = x_e
                .checked_mul(w_s)
                .and_then(|c| sub.and_then(|s| c.checked_add(s)))
                .ok_or(OracleError::Overflow(OverflowError))?;
            // Strict improvement keeps the first, lexicographically smallest
            // edge on ties: `edges()` is sorted.
            if best.map_or(true, |(b, _)| cost < b) {
                best = Some((cost, e));
            }
        }
        let (cost, e) = best.expect("connected subsets of >= 2 vertices contain an edge");
        self.memo.insert(mask, (cost, e));
        Ok(cost)
    }

    /// Vertices reachable from `from` inside `mask` without crossing edge
    /// `skip`.
    fn side_mask(&self, mask: u64, from: VertexId, skip: usize) -> u64 {
        let mut side = 1u64 << from.0;
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for (nbr, eid) in self.g.neighbors_with_edges(v) {
                let bit = 1u64 << nbr.0;
                if eid as usize != skip && mask & bit != 0 && side & bit == 0 {
                    side |= bit;
                    stack.push(nbr);
                }
            }
        }
        side
    }

    fn rebuild(&self, mask: u64, nodes: &mut Vec<EptNode>) -> NodeId {
        if mask.count_ones() == 1 {
            nodes.push(EptNode::Leaf(VertexId(mask.trailing_zeros())));
            return NodeId(nodes.len() as u32 - 1);
        }
        let (_, e) = self.memo[&mask];
        let eid = self.g.edge_id(e).expect("memoized edges come from the tree");
        let s1 = self.side_mask(mask, e.u(), eid);
        let left = self.rebuild(s1, nodes);
        let right = self.rebuild(mask ^ s1, nodes);
        nodes.push(EptNode::Internal {
            edge: e,
            left,
            right,
        });
        NodeId(nodes.len() as u32 - 1)
    }
}

/// Number of labeled trees on n vertices: n^(n-2).
pub fn labeled_tree_count(n: usize) -> u64 {
    match n {
        0 => 0,
        1 | 2 => 1,
        _ => (n as u64).pow(n as u32 - 2),
    }
}

/// Pruefer sequence for `index` in lexicographic order over all n^(n-2)
/// sequences: the index read as n-2 base-n digits, most significant first.
pub fn prufer_from_index(n: usize, mut index: u64) -> Vec<u32> {
    let len = n.saturating_sub(2);
    let mut seq = vec![0u32; len];
    for slot in seq.iter_mut().rev() {
        *slot = (index % n as u64) as u32;
        index /= n as u64;
    }
    debug_assert_eq!(index, 0, "index past the sequence count");
    seq
}

/// Standard linear-time Pruefer decode: repeatedly joins the smallest
/// current leaf to the next sequence entry.
pub fn prufer_decode(seq: &[u32], n: usize) -> Result<InputTree, TreeError> {
    if n == 0 {
        return Err(TreeError::NoVertices);
    }
    let expected = n.saturating_sub(2);
    if seq.len() != expected {
        return Err(TreeError::PruferLength {
            n,
            expected,
            found: seq.len(),
        });
    }
    for &x in seq {
        if x as usize >= n {
            return Err(TreeError::VertexOutOfRange { v: x as u64, n });
        }
    }
    if n == 1 {
        return InputTree::from_edges(1, &[]);
    }
    let mut degree = vec![1u32; n];
    for &x in seq {
        degree[x as usize] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut ptr = 0usize; // smallest index not yet consumed as a leaf
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &x in seq {
        edges.push((leaf as u32, x));
        degree[x as usize] -= 1;
        if degree[x as usize] == 1 && (x as usize) < ptr {
            // x just became a leaf below the pointer; it is next by index.
            leaf = x as usize;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf as u32, n as u32 - 1));
    InputTree::from_edges(n, &edges)
}

/// All labeled trees on n vertices in Pruefer-lexicographic order. Capped at
/// n = 9 (already ~4.8 million trees).
pub fn enumerate_labeled_trees(n: usize) -> Result<LabeledTrees, OracleError> {
    if !(2..=9).contains(&n) {
        return Err(OracleError::Unsupported(format!(
            "exhaustive enumeration covers 2 <= n <= 9, got {n}"
        )));
    }
    Ok(LabeledTrees {
        n,
        next: 0,
        count: labeled_tree_count(n),
    })
}

pub struct LabeledTrees {
    n: usize,
    next: u64,
    count: u64,
}

impl Iterator for LabeledTrees {
    type Item = InputTree;

    fn next(&mut self) -> Option<InputTree> {
        if self.next >= self.count {
            return None;
        }
        let seq = prufer_from_index(self.n, self.next);
        self.next += 1;
        Some(prufer_decode(&seq, self.n).expect("enumerated sequences are in range"))
    }
}

/// Uniform labeled tree on n vertices, deterministic in the seed.
pub fn random_tree(n: usize, seed: u64) -> Result<InputTree, TreeError> {
    if n == 0 {
        return Err(TreeError::NoVertices);
    }
    if n <= 2 {
        return prufer_decode(&[], n);
    }
    let mut rng = SplitMix64::new(seed);
    let seq: Vec<u32> = (0..n - 2).map(|_| rng.next_below(n as u64) as u32).collect();
    prufer_decode(&seq, n)
}

/// Copy of `g` with vertex weights drawn uniformly from `lo..=hi`. Zero
/// weights are deliberately out of range here; experiments that stress them
/// draw their own.
pub fn random_weights(g: &InputTree, lo: u64, hi: u64, seed: u64) -> Result<InputTree, TreeError> {
    if lo == 0 || lo > hi {
        return Err(TreeError::WeightRange { lo, hi });
    }
    let mut rng = SplitMix64::new(seed);
    let range = hi - lo + 1; // lo >= 1, so this cannot overflow
    let weights: Vec<Weight> = (0..g.n())
        .map(|_| Weight::new(lo + rng.next_below(range)))
        .collect();
    g.with_vertex_weights(weights)
}
