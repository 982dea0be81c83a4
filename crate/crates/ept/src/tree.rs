//! Input model: vertex-weighted trees with optional positive edge weights,
//! restrictions to connected vertex subsets, and the balanced-cut queries
//! (component weights, centroids, most-balanced edges).

use std::fmt;

use crate::error::TreeError;
use crate::weight::Weight;

/// Vertex index in `[0, n)`, stable across all operations on one tree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Undirected edge in canonical orientation: `u < v` always holds, and the
/// derived ordering (lexicographic on `(u, v)`) is the tie-break order used
/// everywhere a most-balanced edge is selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeRef {
    u: VertexId,
    v: VertexId,
}

impl EdgeRef {
    pub fn new(a: VertexId, b: VertexId) -> EdgeRef {
        debug_assert_ne!(a, b, "self-loops cannot be edges");
        if a <= b {
            EdgeRef { u: a, v: b }
        } else {
            EdgeRef { u: b, v: a }
        }
    }

    pub fn of(a: u32, b: u32) -> EdgeRef {
        EdgeRef::new(VertexId(a), VertexId(b))
    }

    pub fn u(self) -> VertexId {
        self.u
    }

    pub fn v(self) -> VertexId {
        self.v
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.u, self.v)
    }
}

/// Outcome of cutting one edge inside a restriction: the vertex weight on
/// each side, labelled by the edge endpoint the side contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutResult {
    pub edge: EdgeRef,
    pub side_u_weight: Weight,
    pub side_v_weight: Weight,
    pub max_side: Weight,
}

/// A subset of a tree's vertices, held as an explicit membership mask plus
/// the sorted member list. Queries check on use that the subset induces a
/// connected subtree.
#[derive(Clone, Debug)]
pub struct Restriction {
    members: Vec<VertexId>,
    mask: Vec<bool>,
}

impl Restriction {
    pub fn full(tree: &InputTree) -> Restriction {
        Restriction {
            members: (0..tree.n as u32).map(VertexId).collect(),
            mask: vec![true; tree.n],
        }
    }

    pub fn from_vertices(tree: &InputTree, vertices: &[VertexId]) -> Result<Restriction, TreeError> {
        if vertices.is_empty() {
            return Err(TreeError::EmptyRestriction);
        }
        let mut mask = vec![false; tree.n];
        let mut members = Vec::with_capacity(vertices.len());
        for &v in vertices {
            if v.index() >= tree.n {
                return Err(TreeError::VertexOutOfRange {
                    v: v.0 as u64,
                    n: tree.n,
                });
            }
            if mask[v.index()] {
                return Err(TreeError::DuplicateInRestriction(v));
            }
            mask[v.index()] = true;
            members.push(v);
        }
        members.sort_unstable();
        Ok(Restriction { members, mask })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.mask.get(v.index()).copied().unwrap_or(false)
    }

    /// Members in ascending vertex order.
    pub fn members(&self) -> &[VertexId] {
        &self.members
    }
}

/// A vertex-weighted tree on vertices `0..n`. Vertex weights default to 1
/// and may be 0; the total weight is positive and fits in `u64` (both are
/// validated on construction). Edge weights, when present, are at least 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputTree {
    n: usize,
    /// Canonical edge list, sorted lexicographically; positions are edge ids.
    edges: Vec<EdgeRef>,
    /// CSR adjacency: neighbors of `v` are `adj_vertex[adj_off[v]..adj_off[v+1]]`,
    /// sorted ascending, with the matching edge id alongside.
    adj_off: Vec<u32>,
    adj_vertex: Vec<u32>,
    adj_edge: Vec<u32>,
    vertex_weights: Vec<Weight>,
    edge_weights: Option<Vec<Weight>>,
    total_weight: Weight,
    unit_weights: bool,
    has_zero_weight: bool,
}

impl InputTree {
    /// Builds a unit-weight tree from an edge list.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<InputTree, TreeError> {
        let refs = canonical_edges(n, edges)?;
        InputTree::from_parts(n, refs, None, None)
    }

    /// Replaces all vertex weights, revalidating the totals.
    pub fn with_vertex_weights(&self, weights: Vec<Weight>) -> Result<InputTree, TreeError> {
        let eweights = self.edge_weight_entries();
        InputTree::from_parts(self.n, self.edges.clone(), Some(weights), eweights)
    }

    /// Full constructor: canonical edges, optional weights.
    pub fn from_parts(
        n: usize,
        mut edges: Vec<EdgeRef>,
        vertex_weights: Option<Vec<Weight>>,
        edge_weights: Option<Vec<(EdgeRef, Weight)>>,
    ) -> Result<InputTree, TreeError> {
        if n == 0 {
            return Err(TreeError::NoVertices);
        }
        for e in &edges {
            if e.v.index() >= n {
                return Err(TreeError::VertexOutOfRange {
                    v: e.v.0 as u64,
                    n,
                });
            }
        }
        if edges.len() != n - 1 {
            return Err(TreeError::WrongEdgeCount {
                expected: n - 1,
                found: edges.len(),
            });
        }
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(TreeError::DuplicateEdge(w[0]));
            }
        }

        // CSR adjacency with neighbors ascending. Each vertex's slice is
        // filled in edge-id order and then sorted by neighbor.
        let mut degree = vec![0u32; n];
        for e in &edges {
            degree[e.u.index()] += 1;
            degree[e.v.index()] += 1;
        }
        let mut adj_off = Vec::with_capacity(n + 1);
        let mut acc = 0u32;
        adj_off.push(0);
        for d in &degree {
            acc += d;
            adj_off.push(acc);
        }
        let mut adj_vertex = vec![0u32; edges.len() * 2];
        let mut adj_edge = vec![0u32; edges.len() * 2];
        let mut cursor: Vec<u32> = adj_off[..n].to_vec();
        for (id, e) in edges.iter().enumerate() {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                let slot = cursor[a.index()] as usize;
                cursor[a.index()] += 1;
                adj_vertex[slot] = b.0;
                adj_edge[slot] = id as u32;
            }
        }
        for v in 0..n {
            let lo = adj_off[v] as usize;
            let hi = adj_off[v + 1] as usize;
            let mut pairs: Vec<(u32, u32)> = (lo..hi).map(|i| (adj_vertex[i], adj_edge[i])).collect();
            pairs.sort_unstable();
            for (i, (nbr, eid)) in pairs.into_iter().enumerate() {
                adj_vertex[lo + i] = nbr;
                adj_edge[lo + i] = eid;
            }
        }

        // Exactly n-1 edges, so connected iff acyclic iff a tree.
        let mut seen = vec![false; n];
        let mut queue = vec![0u32];
        seen[0] = true;
        let mut reached = 1usize;
        while let Some(v) = queue.pop() {
            let lo = adj_off[v as usize] as usize;
            let hi = adj_off[v as usize + 1] as usize;
            for &nbr in &adj_vertex[lo..hi] {
                if !seen[nbr as usize] {
                    seen[nbr as usize] = true;
                    reached += 1;
                    queue.push(nbr);
                }
            }
        }
        if reached != n {
            return Err(TreeError::Disconnected);
        }

        let vertex_weights = match vertex_weights {
            Some(ws) => {
                if ws.len() != n {
                    return Err(TreeError::WrongWeightCount {
                        expected: n,
                        found: ws.len(),
                    });
                }
                ws
            }
            None => vec![Weight::ONE; n],
        };
        let total_weight = Weight::checked_sum(vertex_weights.iter().copied())
            .map_err(|_| TreeError::WeightOverflow)?;
        if total_weight.is_zero() {
            return Err(TreeError::ZeroTotalWeight);
        }
        let unit_weights = vertex_weights.iter().all(|w| *w == Weight::ONE);
        let has_zero_weight = vertex_weights.iter().any(|w| w.is_zero());

        let edge_weights = match edge_weights {
            Some(entries) => {
                let mut ws = vec![Weight::ONE; edges.len()];
                let mut set = vec![false; edges.len()];
                for (e, x) in entries {
                    let id = edges
                        .binary_search(&e)
                        .map_err(|_| TreeError::NotAnEdge(e))?;
                    if set[id] {
                        return Err(TreeError::DuplicateEdge(e));
                    }
                    if x.is_zero() {
                        return Err(TreeError::ZeroEdgeWeight(e));
                    }
                    set[id] = true;
                    ws[id] = x;
                }
                // All-ones is the unweighted case; store it canonically so
                // equality and serialization cannot tell the two apart.
                if ws.iter().all(|w| *w == Weight::ONE) {
                    None
                } else {
                    Some(ws)
                }
            }
            None => None,
        };

        Ok(InputTree {
            n,
            edges,
            adj_off,
            adj_vertex,
            adj_edge,
            vertex_weights,
            edge_weights,
            total_weight,
            unit_weights,
            has_zero_weight,
        })
    }

    /// Parses the tree file format:
    ///
    /// ```text
    /// # comment
    /// tree <n>
    /// edge <u> <v>        (exactly n-1 lines)
    /// weight <v> <w>      (optional; unspecified weights are 1)
    /// eweight <u> <v> <x> (optional; unspecified edge weights are 1)
    /// ```
    pub fn parse(text: &str) -> Result<InputTree, TreeError> {
        let mut n: Option<usize> = None;
        let mut edges: Vec<EdgeRef> = Vec::new();
        let mut weights: Vec<Option<Weight>> = Vec::new();
        let mut eweights: Vec<(EdgeRef, Weight)> = Vec::new();
        let mut in_weight_section = false;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let mut it = s.split_whitespace();
            let kw = it.next().unwrap();
            match kw {
                "tree" => {
                    if n.is_some() {
                        return Err(syntax(line, "repeated tree line"));
                    }
                    let count = parse_num(line, it.next())? as usize;
                    if count == 0 {
                        return Err(syntax(line, "tree needs at least one vertex"));
                    }
                    expect_end(line, it)?;
                    weights = vec![None; count];
                    n = Some(count);
                }
                "edge" => {
                    let n = n.ok_or_else(|| syntax(line, "edge before tree line"))?;
                    if in_weight_section {
                        return Err(syntax(line, "edge line after weight lines"));
                    }
                    let u = parse_vertex(line, it.next(), n)?;
                    let v = parse_vertex(line, it.next(), n)?;
                    expect_end(line, it)?;
                    if u == v {
                        return Err(TreeError::SelfLoop(u));
                    }
                    edges.push(EdgeRef::new(u, v));
                }
                "weight" => {
                    let n = n.ok_or_else(|| syntax(line, "weight before tree line"))?;
                    check_edges_complete(line, n, &edges)?;
                    in_weight_section = true;
                    let v = parse_vertex(line, it.next(), n)?;
                    let w = parse_num(line, it.next())?;
                    expect_end(line, it)?;
                    if weights[v.index()].is_some() {
                        return Err(syntax(line, &format!("repeated weight for vertex {v}")));
                    }
                    weights[v.index()] = Some(Weight::new(w));
                }
                "eweight" => {
                    let n = n.ok_or_else(|| syntax(line, "eweight before tree line"))?;
                    check_edges_complete(line, n, &edges)?;
                    in_weight_section = true;
                    let u = parse_vertex(line, it.next(), n)?;
                    let v = parse_vertex(line, it.next(), n)?;
                    let x = parse_num(line, it.next())?;
                    expect_end(line, it)?;
                    if u == v {
                        return Err(TreeError::SelfLoop(u));
                    }
                    eweights.push((EdgeRef::new(u, v), Weight::new(x)));
                }
                other => {
                    return Err(syntax(line, &format!("unknown directive `{other}`")));
                }
            }
        }

        let n = n.ok_or_else(|| syntax(0, "missing tree line"))?;
        let vertex_weights: Vec<Weight> = weights
            .into_iter()
            .map(|w| w.unwrap_or(Weight::ONE))
            .collect();
        let eweights = if eweights.is_empty() { None } else { Some(eweights) };
        InputTree::from_parts(n, edges, Some(vertex_weights), eweights)
    }

    /// Emits the tree file format with edges in canonical order. Weight
    /// lines appear only for values other than 1, so a round trip preserves
    /// the weight functions exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("tree {}\n", self.n);
        for e in &self.edges {
            out.push_str(&format!("edge {} {}\n", e.u, e.v));
        }
        for (v, w) in self.vertex_weights.iter().enumerate() {
            if *w != Weight::ONE {
                out.push_str(&format!("weight {} {}\n", v, w));
            }
        }
        if let Some(ws) = &self.edge_weights {
            for (e, x) in self.edges.iter().zip(ws) {
                if *x != Weight::ONE {
                    out.push_str(&format!("eweight {} {} {}\n", e.u, e.v, x));
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n as u32).map(VertexId)
    }

    /// Canonical edge list, sorted lexicographically.
    pub fn edges(&self) -> &[EdgeRef] {
        &self.edges
    }

    pub fn total_weight(&self) -> Weight {
        self.total_weight
    }

    pub fn vertex_weight(&self, v: VertexId) -> Weight {
        self.vertex_weights[v.index()]
    }

    /// Weight of an edge; 1 when no edge weights were given.
    pub fn edge_weight(&self, e: EdgeRef) -> Result<Weight, TreeError> {
        let id = self.edge_id(e).ok_or(TreeError::NotAnEdge(e))?;
        Ok(match &self.edge_weights {
            Some(ws) => ws[id],
            None => Weight::ONE,
        })
    }

    pub fn has_edge_weights(&self) -> bool {
        self.edge_weights.is_some()
    }

    /// True when every vertex weight is exactly 1.
    pub fn unit_weights(&self) -> bool {
        self.unit_weights
    }

    pub fn has_zero_weight(&self) -> bool {
        self.has_zero_weight
    }

    pub fn neighbors(&self, v: VertexId) -> &[u32] {
        let lo = self.adj_off[v.index()] as usize;
        let hi = self.adj_off[v.index() + 1] as usize;
        &self.adj_vertex[lo..hi]
    }

    pub(crate) fn neighbors_with_edges(&self, v: VertexId) -> impl Iterator<Item = (VertexId, u32)> + '_ {
        let lo = self.adj_off[v.index()] as usize;
        let hi = self.adj_off[v.index() + 1] as usize;
        self.adj_vertex[lo..hi]
            .iter()
            .zip(&self.adj_edge[lo..hi])
            .map(|(&nbr, &eid)| (VertexId(nbr), eid))
    }

    pub fn edge_id(&self, e: EdgeRef) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    fn edge_weight_entries(&self) -> Option<Vec<(EdgeRef, Weight)>> {
        self.edge_weights
            .as_ref()
            .map(|ws| self.edges.iter().copied().zip(ws.iter().copied()).collect())
    }

    /// Total vertex weight of the two components of the restricted subtree
    /// minus `e`. Sides are labelled by the endpoint they contain.
    pub fn component_weights(&self, r: &Restriction, e: EdgeRef) -> Result<CutResult, TreeError> {
        if r.len() < 2 {
            return Err(TreeError::RestrictionTooSmall);
        }
        let eid = self.edge_id(e).ok_or(TreeError::NotAnEdge(e))?;
        if !r.contains(e.u) || !r.contains(e.v) {
            return Err(TreeError::EdgeNotInRestriction(e));
        }
        let total = self.check_connected(r)?;
        let side_u = self.side_weight(r, e.u, eid);
        let side_v = Weight::new(total.get() - side_u.get());
        Ok(CutResult {
            edge: e,
            side_u_weight: side_u,
            side_v_weight: side_v,
            max_side: side_u.max(side_v),
        })
    }

    /// Smallest-index vertex of the restriction whose removal leaves no
    /// component heavier than half the restriction's weight.
    pub fn find_centroid(&self, r: &Restriction) -> Result<VertexId, TreeError> {
        if r.is_empty() {
            return Err(TreeError::EmptyRestriction);
        }
        if r.len() == 1 {
            return Ok(r.members[0]);
        }
        let rooted = self.rooted_scan(r)?;
        let total = rooted.total.get();
        // Largest component weight left by deleting v: the heaviest child
        // subtree, or everything above v.
        let mut best: Option<VertexId> = None;
        for &v in &r.members {
            let mut max_comp = total - rooted.sub_weight[v.index()];
            for (nbr, _) in self.neighbors_with_edges(v) {
                if r.contains(nbr) && rooted.parent[nbr.index()] == v.0 {
                    max_comp = max_comp.max(rooted.sub_weight[nbr.index()]);
                }
            }
            if (max_comp as u128) * 2 <= total as u128 {
                best = Some(v);
                break;
            }
        }
        Ok(best.expect("a tree always has a weight centroid"))
    }

    /// Edge of the restricted subtree minimizing the heavier side of the cut,
    /// ties broken toward the lexicographically smallest edge.
    pub fn find_balanced_edge(&self, r: &Restriction) -> Result<CutResult, TreeError> {
        if r.len() < 2 {
            return Err(TreeError::RestrictionTooSmall);
        }
        let rooted = self.rooted_scan(r)?;
        let total = rooted.total.get();
        let mut best: Option<(Weight, EdgeRef)> = None;
        for &v in &r.members {
            let p = rooted.parent[v.index()];
            if p == u32::MAX {
                continue;
            }
            let e = EdgeRef::new(v, VertexId(p));
            let down = rooted.sub_weight[v.index()];
            let max_side = Weight::new(down.max(total - down));
            if best.map_or(true, |b| (max_side, e) < b) {
                best = Some((max_side, e));
            }
        }
        let (_, e) = best.expect("restriction with >= 2 vertices has an edge");
        self.component_weights(r, e)
    }

    /// Rooted traversal of the restricted subtree from its smallest member;
    /// errors when the restriction is not connected.
    fn rooted_scan(&self, r: &Restriction) -> Result<RootedScan, TreeError> {
        let root = r.members[0];
        let mut parent = vec![u32::MAX; self.n];
        let mut order = Vec::with_capacity(r.len());
        order.push(root);
        let mut seen = vec![false; self.n];
        seen[root.index()] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for (nbr, _) in self.neighbors_with_edges(v) {
                if r.contains(nbr) && !seen[nbr.index()] {
                    seen[nbr.index()] = true;
                    parent[nbr.index()] = v.0;
                    order.push(nbr);
                }
            }
        }
        if order.len() != r.len() {
            return Err(TreeError::DisconnectedRestriction);
        }
        let mut sub_weight = vec![0u64; self.n];
        for &v in order.iter().rev() {
            sub_weight[v.index()] += self.vertex_weights[v.index()].get();
            let p = parent[v.index()];
            if p != u32::MAX {
                sub_weight[p as usize] += sub_weight[v.index()];
            }
        }
        let total = Weight::new(sub_weight[root.index()]);
        Ok(RootedScan {
            parent,
            sub_weight,
            total,
        })
    }

    fn check_connected(&self, r: &Restriction) -> Result<Weight, TreeError> {
        Ok(self.rooted_scan(r)?.total)
    }

    /// Weight of the component of the restriction minus edge `eid` that
    /// contains `from`.
    fn side_weight(&self, r: &Restriction, from: VertexId, eid: usize) -> Weight {
        let mut seen = vec![false; self.n];
        seen[from.index()] = true;
        let mut stack = vec![from];
        let mut acc = 0u64;
        while let Some(v) = stack.pop() {
            acc += self.vertex_weights[v.index()].get();
            for (nbr, id) in self.neighbors_with_edges(v) {
                if id as usize != eid && r.contains(nbr) && !seen[nbr.index()] {
                    seen[nbr.index()] = true;
                    stack.push(nbr);
                }
            }
        }
        Weight::new(acc)
    }
}

struct RootedScan {
    parent: Vec<u32>,
    sub_weight: Vec<u64>,
    total: Weight,
}

fn canonical_edges(n: usize, edges: &[(u32, u32)]) -> Result<Vec<EdgeRef>, TreeError> {
    let mut refs = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        if a as usize >= n {
            return Err(TreeError::VertexOutOfRange { v: a as u64, n });
        }
        if b as usize >= n {
            return Err(TreeError::VertexOutOfRange { v: b as u64, n });
        }
        if a == b {
            return Err(TreeError::SelfLoop(VertexId(a)));
        }
        refs.push(EdgeRef::of(a, b));
    }
    Ok(refs)
}

fn syntax(line: usize, msg: &str) -> TreeError {
    TreeError::Syntax {
        line,
        msg: msg.to_string(),
    }
}

fn parse_num(line: usize, tok: Option<&str>) -> Result<u64, TreeError> {
    let tok = tok.ok_or_else(|| syntax(line, "missing number"))?;
    tok.parse::<u64>()
        .map_err(|_| syntax(line, &format!("bad number `{tok}`")))
}

fn parse_vertex(line: usize, tok: Option<&str>, n: usize) -> Result<VertexId, TreeError> {
    let v = parse_num(line, tok)?;
    if v >= n as u64 {
        return Err(TreeError::VertexOutOfRange { v, n });
    }
    Ok(VertexId(v as u32))
}

fn expect_end<'a>(line: usize, mut it: impl Iterator<Item = &'a str>) -> Result<(), TreeError> {
    match it.next() {
        None => Ok(()),
        Some(tok) => Err(syntax(line, &format!("unexpected trailing `{tok}`"))),
    }
}

fn check_edges_complete(line: usize, n: usize, edges: &[EdgeRef]) -> Result<(), TreeError> {
    if edges.len() != n - 1 {
        return Err(syntax(
            line,
            &format!("weights before all {} edges are given", n - 1),
        ));
    }
    Ok(())
}
