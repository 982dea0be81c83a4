//! The EPT model: a rooted full binary tree whose leaves are a tree's
//! vertices and whose internal nodes are its edges, each internal node
//! splitting its induced subgraph along its own edge.
//!
//! Nodes live in a flat arena so that arbitrarily deep trees (a caterpillar
//! over 2^20 vertices, say) never recurse on the call stack.

use std::collections::BTreeMap;

use crate::error::{EptViolation, TreeError};
use crate::oracle::SplitMix64;
use crate::tree::{EdgeRef, InputTree, VertexId};
use crate::weight::Weight;

/// Index of a node inside an [`Ept`] arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EptNode {
    Leaf(VertexId),
    Internal {
        edge: EdgeRef,
        left: NodeId,
        right: NodeId,
    },
}

/// An edge partition tree held as a node arena plus a root index.
///
/// Construction canonicalizes child order: the left child is the one whose
/// subtree holds the smaller minimum vertex index, which makes structurally
/// equal trees serialize byte-identically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ept {
    nodes: Vec<EptNode>,
    root: NodeId,
}

impl Ept {
    /// Assembles an EPT from arena parts. The arena must form a tree rooted
    /// at `root` (every node reachable exactly once). Children are swapped
    /// where needed to restore canonical order, and the arena is relaid in
    /// preorder, so structurally equal trees compare and serialize equal no
    /// matter how their arenas were built.
    pub fn from_parts(mut nodes: Vec<EptNode>, root: NodeId) -> Ept {
        assert!(root.index() < nodes.len(), "root out of range");
        let order = preorder(&nodes, root);
        assert_eq!(order.len(), nodes.len(), "arena is not a tree");
        let mut min_leaf = vec![u32::MAX; nodes.len()];
        for &id in order.iter().rev() {
            match nodes[id.index()] {
                EptNode::Leaf(v) => min_leaf[id.index()] = v.0,
                EptNode::Internal { left, right, .. } => {
                    let (ml, mr) = (min_leaf[left.index()], min_leaf[right.index()]);
                    min_leaf[id.index()] = ml.min(mr);
                    if mr < ml {
                        if let EptNode::Internal { left, right, .. } = &mut nodes[id.index()] {
                            std::mem::swap(left, right);
                        }
                    }
                }
            }
        }
        // Preorder changed where children were swapped; recompute, then remap.
        let order = preorder(&nodes, root);
        let mut map = vec![u32::MAX; nodes.len()];
        for (new, id) in order.iter().enumerate() {
            map[id.index()] = new as u32;
        }
        let relaid = order
            .iter()
            .map(|&id| match nodes[id.index()] {
                EptNode::Leaf(v) => EptNode::Leaf(v),
                EptNode::Internal { edge, left, right } => EptNode::Internal {
                    edge,
                    left: NodeId(map[left.index()]),
                    right: NodeId(map[right.index()]),
                },
            })
            .collect();
        Ept {
            nodes: relaid,
            root: NodeId(0),
        }
    }

    pub fn single_leaf(v: VertexId) -> Ept {
        Ept {
            nodes: vec![EptNode::Leaf(v)],
            root: NodeId(0),
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &EptNode {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn internal_node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match n {
            EptNode::Internal { .. } => Some(NodeId(i as u32)),
            EptNode::Leaf(_) => None,
        })
    }

    /// Leaf vertices below `id`, in subtree traversal order.
    pub fn leaves_below(&self, id: NodeId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            match self.nodes[x.index()] {
                EptNode::Leaf(v) => out.push(v),
                EptNode::Internal { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        crate::json::ept_to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Ept, crate::error::JsonError> {
        crate::json::ept_from_json(text)
    }
}

/// Root-first traversal order; parents always precede their children.
fn preorder(nodes: &[EptNode], root: NodeId) -> Vec<NodeId> {
    let mut order = Vec::with_capacity(nodes.len());
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        assert!(!seen[id.index()], "node {} visited twice", id.0);
        seen[id.index()] = true;
        order.push(id);
        if let EptNode::Internal { left, right, .. } = nodes[id.index()] {
            stack.push(right);
            stack.push(left);
        }
    }
    order
}

/// Total leaf weight under every node, indexed by arena position.
pub(crate) fn leaf_weight_below(g: &InputTree, t: &Ept) -> Result<Vec<u64>, TreeError> {
    let order = preorder(&t.nodes, t.root);
    let mut below = vec![0u64; t.nodes.len()];
    for &id in order.iter().rev() {
        below[id.index()] = match t.nodes[id.index()] {
            EptNode::Leaf(v) => g.vertex_weight(v).get(),
            EptNode::Internal { left, right, .. } => below[left.index()]
                .checked_add(below[right.index()])
                .ok_or(TreeError::WeightOverflow)?,
        };
    }
    Ok(below)
}

/// Cost of an EPT charged edge by edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostBreakdown {
    pub total: Weight,
    /// Edge weight times the leaf weight below that edge's node.
    pub per_internal_node: BTreeMap<EdgeRef, Weight>,
}

/// Cost summed over internal nodes: each edge's node is charged its edge
/// weight times the total leaf weight underneath it.
pub fn ept_sum_edges(g: &InputTree, t: &Ept) -> Result<CostBreakdown, TreeError> {
    let below = leaf_weight_below(g, t)?;
    let mut per = BTreeMap::new();
    let mut total = Weight::ZERO;
    for (i, node) in t.nodes.iter().enumerate() {
        if let EptNode::Internal { edge, .. } = node {
            let x = g.edge_weight(*edge)?;
            let contrib = x
                .checked_mul(Weight::new(below[i]))
                .map_err(|_| TreeError::WeightOverflow)?;
            total = total
                .checked_add(contrib)
                .map_err(|_| TreeError::WeightOverflow)?;
            per.insert(*edge, contrib);
        }
    }
    Ok(CostBreakdown {
        total,
        per_internal_node: per,
    })
}

/// Cost summed over leaves: each vertex is charged its weight times the
/// total edge weight along its ancestor path (its depth, for unit edge
/// weights). Always equal to [`ept_sum_edges`] on valid trees.
pub fn ept_sum_leaves(g: &InputTree, t: &Ept) -> Result<Weight, TreeError> {
    let mut total = Weight::ZERO;
    let mut stack = vec![(t.root, Weight::ZERO)];
    while let Some((id, acc)) = stack.pop() {
        match t.nodes[id.index()] {
            EptNode::Leaf(v) => {
                let contrib = g
                    .vertex_weight(v)
                    .checked_mul(acc)
                    .map_err(|_| TreeError::WeightOverflow)?;
                total = total
                    .checked_add(contrib)
                    .map_err(|_| TreeError::WeightOverflow)?;
            }
            EptNode::Internal { edge, left, right } => {
                let x = g.edge_weight(edge)?;
                let acc = acc
                    .checked_add(x)
                    .map_err(|_| TreeError::WeightOverflow)?;
                stack.push((left, acc));
                stack.push((right, acc));
            }
        }
    }
    Ok(total)
}

/// Confirms the four EPT invariants against `g`, or reports the first
/// violated one: (1) the arena is a full binary tree, (2) leaves biject with
/// the vertices, (3) internal nodes biject with the edges, (4) every internal
/// node's children hold exactly the two components of its induced subgraph
/// minus its edge. Canonical child order is checked alongside (4).
pub fn validate_ept(g: &InputTree, t: &Ept) -> Result<(), EptViolation> {
    // (1) arena shape: one root, every node referenced exactly once.
    let mut indegree = vec![0u32; t.nodes.len()];
    for node in &t.nodes {
        if let EptNode::Internal { left, right, .. } = node {
            for c in [left, right] {
                if c.index() >= t.nodes.len() {
                    return Err(EptViolation::BrokenArena(format!(
                        "child index {} out of range",
                        c.0
                    )));
                }
                indegree[c.index()] += 1;
            }
        }
    }
    if t.root.index() >= t.nodes.len() || indegree[t.root.index()] != 0 {
        return Err(EptViolation::BrokenArena("bad root".into()));
    }
    for (i, d) in indegree.iter().enumerate() {
        if i != t.root.index() && *d != 1 {
            return Err(EptViolation::BrokenArena(format!(
                "node {i} referenced {d} times"
            )));
        }
    }

    // (2) leaves biject with vertices.
    let mut leaf_seen = vec![false; g.n()];
    let mut leaf_count = 0usize;
    for node in &t.nodes {
        if let EptNode::Leaf(v) = node {
            if v.index() >= g.n() {
                return Err(EptViolation::LeafBijection(format!(
                    "leaf vertex {v} out of range"
                )));
            }
            if leaf_seen[v.index()] {
                return Err(EptViolation::LeafBijection(format!("vertex {v} repeated")));
            }
            leaf_seen[v.index()] = true;
            leaf_count += 1;
        }
    }
    if leaf_count != g.n() {
        return Err(EptViolation::LeafBijection(format!(
            "{} leaves for {} vertices",
            leaf_count,
            g.n()
        )));
    }

    // (3) internal nodes biject with edges.
    let mut edge_seen = vec![false; g.edges().len()];
    for node in &t.nodes {
        if let EptNode::Internal { edge, .. } = node {
            match g.edge_id(*edge) {
                None => {
                    return Err(EptViolation::EdgeBijection(format!(
                        "{edge} is not an edge of the tree"
                    )))
                }
                Some(id) => {
                    if edge_seen[id] {
                        return Err(EptViolation::EdgeBijection(format!("{edge} repeated")));
                    }
                    edge_seen[id] = true;
                }
            }
        }
    }
    // Counts now agree: n leaves and (arena - n) internals over n-1 edges.
    if t.nodes.len() != 2 * g.n() - 1 {
        return Err(EptViolation::EdgeBijection(format!(
            "{} internal nodes for {} edges",
            t.nodes.len() - leaf_count,
            g.edges().len()
        )));
    }

    // (4) recursive partition property plus canonical child order, checked
    // root-first so the offending node is the first in traversal order.
    let mut in_s = vec![false; g.n()];
    let mut comp = vec![false; g.n()];
    for id in preorder(&t.nodes, t.root) {
        let EptNode::Internal { edge, left, right } = t.nodes[id.index()] else {
            continue;
        };
        let lu = t.leaves_below(left);
        let lv = t.leaves_below(right);

        let min_l = lu.iter().min().unwrap();
        let min_r = lv.iter().min().unwrap();
        if min_r < min_l {
            return Err(EptViolation::ChildOrder { node: id.index() });
        }

        for v in lu.iter().chain(&lv) {
            in_s[v.index()] = true;
        }
        let result = check_partition(g, edge, &lu, &lv, &in_s, &mut comp);
        for v in lu.iter().chain(&lv) {
            in_s[v.index()] = false;
        }
        if let Err(detail) = result {
            return Err(EptViolation::Partition {
                node: id.index(),
                edge,
                detail,
            });
        }
    }
    Ok(())
}

/// Checks that `lu`/`lv` are exactly the two components of the subgraph
/// induced on their union minus `edge`. `comp` is scratch, returned clear.
fn check_partition(
    g: &InputTree,
    edge: EdgeRef,
    lu: &[VertexId],
    lv: &[VertexId],
    in_s: &[bool],
    comp: &mut [bool],
) -> Result<(), String> {
    if !in_s[edge.u().index()] || !in_s[edge.v().index()] {
        return Err(format!("{edge} has an endpoint outside the node's leaves"));
    }
    let eid = g.edge_id(edge).expect("edge checked in bijection pass") as u32;
    let mut walked = Vec::new();
    for (start, own, other) in [(edge.u(), lu, lv), (edge.v(), lv, lu)] {
        // Component of the induced subgraph minus `edge` containing `start`.
        walked.clear();
        walked.push(start);
        comp[start.index()] = true;
        let mut i = 0;
        while i < walked.len() {
            let x = walked[i];
            i += 1;
            for (nbr, id) in g.neighbors_with_edges(x) {
                if id != eid && in_s[nbr.index()] && !comp[nbr.index()] {
                    comp[nbr.index()] = true;
                    walked.push(nbr);
                }
            }
        }
        let side = if own.contains(&start) { own } else { other };
        let matches =
            side.len() == walked.len() && side.iter().all(|v| comp[v.index()]);
        for v in &walked {
            comp[v.index()] = false;
        }
        if !matches {
            return Err(format!(
                "component holding {start} has {} vertices, child holds {}",
                walked.len(),
                side.len()
            ));
        }
    }
    Ok(())
}

/// One side of a split: the component as a tree of its own (vertices
/// renumbered, ascending by original id), the EPT induced on it, and the
/// new-to-original vertex mapping.
#[derive(Clone, Debug)]
pub struct SplitPart {
    pub tree: InputTree,
    pub ept: Ept,
    /// `vertices[new.index()]` is the original id.
    pub vertices: Vec<VertexId>,
}

/// Splits `t` along edge `e` of `g`: the node for `e` disappears and every
/// other node is reattached under its lowest ancestor lying in the same
/// component of `g - e`. Returns the side containing `e.u` first. Both
/// outputs are valid EPTs of their components, and their cost never exceeds
/// the original (strictly less when the leaf weight below `e`'s node is
/// positive).
pub fn split(g: &InputTree, t: &Ept, e: EdgeRef) -> Result<(SplitPart, SplitPart), TreeError> {
    let eid = g.edge_id(e).ok_or(TreeError::NotAnEdge(e))? as u32;

    // Side of every vertex: 0 for the component of e.u, 1 for e.v's.
    let mut side = vec![1u8; g.n()];
    let mut stack = vec![e.u()];
    side[e.u().index()] = 0;
    while let Some(v) = stack.pop() {
        for (nbr, id) in g.neighbors_with_edges(v) {
            if id != eid && side[nbr.index()] == 1 {
                side[nbr.index()] = 0;
                stack.push(nbr);
            }
        }
    }
    side[e.v().index()] = 1;

    // Renumber each side's vertices ascending, preserving relative order so
    // canonical child order is unaffected.
    let mut remap = vec![u32::MAX; g.n()];
    let mut old_ids: [Vec<VertexId>; 2] = [Vec::new(), Vec::new()];
    for v in g.vertices() {
        let s = side[v.index()] as usize;
        remap[v.index()] = old_ids[s].len() as u32;
        old_ids[s].push(v);
    }

    let mut part_edges: [Vec<EdgeRef>; 2] = [Vec::new(), Vec::new()];
    let mut part_eweights: [Vec<(EdgeRef, Weight)>; 2] = [Vec::new(), Vec::new()];
    for &f in g.edges() {
        if f == e {
            continue;
        }
        let s = side[f.u().index()] as usize;
        debug_assert_eq!(s, side[f.v().index()] as usize, "{f} crosses the cut");
        let mapped = EdgeRef::new(
            VertexId(remap[f.u().index()]),
            VertexId(remap[f.v().index()]),
        );
        part_edges[s].push(mapped);
        if g.has_edge_weights() {
            part_eweights[s].push((mapped, g.edge_weight(f)?));
        }
    }

    // Rebuild both EPTs in one traversal. Attachment stacks track, per side,
    // the nearest ancestor whose edge lies in that component.
    let mut arenas: [Vec<EptNode>; 2] = [Vec::new(), Vec::new()];
    let mut children: [Vec<Vec<NodeId>>; 2] = [Vec::new(), Vec::new()];
    let mut attach: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut roots: [Option<NodeId>; 2] = [None, None];

    enum Ev {
        Enter(NodeId),
        Exit(usize),
    }
    let mut walk = vec![Ev::Enter(t.root())];
    while let Some(ev) = walk.pop() {
        match ev {
            Ev::Exit(s) => {
                attach[s].pop();
            }
            Ev::Enter(id) => match *t.node(id) {
                EptNode::Leaf(v) => {
                    let s = side[v.index()] as usize;
                    let new_id = NodeId(arenas[s].len() as u32);
                    arenas[s].push(EptNode::Leaf(VertexId(remap[v.index()])));
                    children[s].push(Vec::new());
                    place(&mut children[s], &attach[s], &mut roots[s], new_id);
                }
                EptNode::Internal { edge, left, right } => {
                    if edge == e {
                        walk.push(Ev::Enter(right));
                        walk.push(Ev::Enter(left));
                        continue;
                    }
                    let s = side[edge.u().index()] as usize;
                    let new_id = NodeId(arenas[s].len() as u32);
                    let mapped = EdgeRef::new(
                        VertexId(remap[edge.u().index()]),
                        VertexId(remap[edge.v().index()]),
                    );
                    arenas[s].push(EptNode::Internal {
                        edge: mapped,
                        left: NodeId(u32::MAX),
                        right: NodeId(u32::MAX),
                    });
                    children[s].push(Vec::new());
                    place(&mut children[s], &attach[s], &mut roots[s], new_id);
                    attach[s].push(new_id.index());
                    walk.push(Ev::Exit(s));
                    walk.push(Ev::Enter(right));
                    walk.push(Ev::Enter(left));
                }
            },
        }
    }

    let mut parts = Vec::with_capacity(2);
    for s in 0..2 {
        let mut arena = std::mem::take(&mut arenas[s]);
        for (i, ch) in children[s].iter().enumerate() {
            if let EptNode::Internal { left, right, .. } = &mut arena[i] {
                assert_eq!(ch.len(), 2, "internal node kept {} children", ch.len());
                *left = ch[0];
                *right = ch[1];
            } else {
                assert!(ch.is_empty(), "leaf collected children");
            }
        }
        let root = roots[s].expect("each side keeps exactly one root");
        let n = old_ids[s].len();
        let weights: Vec<Weight> = old_ids[s].iter().map(|&v| g.vertex_weight(v)).collect();
        let eweights = if g.has_edge_weights() {
            Some(std::mem::take(&mut part_eweights[s]))
        } else {
            None
        };
        let tree = InputTree::from_parts(
            n,
            std::mem::take(&mut part_edges[s]),
            Some(weights),
            eweights,
        )?;
        parts.push(SplitPart {
            tree,
            ept: Ept::from_parts(arena, root),
            vertices: std::mem::take(&mut old_ids[s]),
        });
    }
    let v_part = parts.pop().unwrap();
    let u_part = parts.pop().unwrap();
    Ok((u_part, v_part))
}

fn place(
    children: &mut [Vec<NodeId>],
    attach: &[usize],
    root: &mut Option<NodeId>,
    id: NodeId,
) {
    match attach.last() {
        Some(&p) => children[p].push(id),
        None => {
            assert!(root.is_none(), "side split into two roots");
            *root = Some(id);
        }
    }
}

/// True when every internal node's edge is a most-balanced edge of the
/// subgraph induced on the leaves below it.
pub fn correctly_placed_all(g: &InputTree, t: &Ept) -> bool {
    let mut in_s = vec![false; g.n()];
    t.internal_node_ids()
        .all(|id| node_correctly_placed(g, t, id, &mut in_s))
}

/// Samples `samples` internal nodes (with replacement) and checks only
/// those; a full check is quadratic and out of reach for huge trees.
pub fn correctly_placed_spot_check(g: &InputTree, t: &Ept, samples: usize, seed: u64) -> bool {
    let internals: Vec<NodeId> = t.internal_node_ids().collect();
    if internals.is_empty() {
        return true;
    }
    let mut rng = SplitMix64::new(seed);
    let mut in_s = vec![false; g.n()];
    (0..samples).all(|_| {
        let id = internals[rng.next_below(internals.len() as u64) as usize];
        node_correctly_placed(g, t, id, &mut in_s)
    })
}

fn node_correctly_placed(g: &InputTree, t: &Ept, id: NodeId, in_s: &mut [bool]) -> bool {
    let EptNode::Internal { edge, .. } = *t.node(id) else {
        return true;
    };
    let leaves = t.leaves_below(id);
    for v in &leaves {
        in_s[v.index()] = true;
    }
    // One rooted pass gives every edge's heavier-side weight within the
    // induced subgraph.
    let mut parent = vec![(u32::MAX, u32::MAX); leaves.len()];
    let mut local = vec![u32::MAX; g.n()];
    for (i, v) in leaves.iter().enumerate() {
        local[v.index()] = i as u32;
    }
    let mut order = vec![leaves[0]];
    let mut seen_root = vec![false; leaves.len()];
    seen_root[0] = true;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        for (nbr, eid) in g.neighbors_with_edges(v) {
            if in_s[nbr.index()] {
                let li = local[nbr.index()] as usize;
                if !seen_root[li] {
                    seen_root[li] = true;
                    parent[li] = (v.0, eid);
                    order.push(nbr);
                }
            }
        }
    }
    let connected = order.len() == leaves.len();
    let mut ok = connected;
    if connected {
        let mut sub = vec![0u64; leaves.len()];
        let mut total = 0u64;
        for v in &leaves {
            let w = g.vertex_weight(*v).get();
            sub[local[v.index()] as usize] = w;
            total += w;
        }
        for v in order.iter().rev() {
            let li = local[v.index()] as usize;
            let (p, _) = parent[li];
            if p != u32::MAX {
                sub[local[p as usize] as usize] += sub[li];
            }
        }
        let mut best = u64::MAX;
        let mut target = u64::MAX;
        for v in order.iter() {
            let li = local[v.index()] as usize;
            let (p, _) = parent[li];
            if p == u32::MAX {
                continue;
            }
            let down = sub[li];
            let ms = down.max(total - down);
            best = best.min(ms);
            if EdgeRef::new(*v, VertexId(p)) == edge {
                target = ms;
            }
        }
        ok = target != u64::MAX && target == best;
    }
    for v in &leaves {
        in_s[v.index()] = false;
        local[v.index()] = u32::MAX;
    }
    ok
}
