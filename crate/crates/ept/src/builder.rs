//! Balanced EPT construction.
//!
//! `build_balanced_naive` recursively cuts a most-balanced edge, rebuilding a
//! fresh restriction for every subproblem; each step costs time linear in the
//! whole tree, which is the quadratic baseline the benchmarks measure.
//!
//! `build_balanced_fast` produces the same tree in O(n log n): each recursion
//! step finds the weight centroid of its component, splits off the incident
//! components in order of decreasing weight as one caterpillar chain, and
//! stops the chain as soon as the remainder drops below two thirds of the
//! component weight, so every piece recursed on shrinks geometrically.
//!
//! For positive weights the two agree edge for edge: a most-balanced edge is
//! always incident to the centroid (any edge deeper inside an incident
//! component leaves a strictly heavier remainder), splitting one off keeps
//! the centroid valid for the remainder while the chain rule holds, and the
//! shared tie rules (smallest-index centroid, lexicographically smallest
//! edge) fix every remaining choice. A zero-weight vertex breaks the
//! incidence argument, so when any weight is zero the fast builder falls
//! back to scanning its component for the same most-balanced edge the naive
//! builder picks — still one tree, merely without the speedup.

use crate::ept::{Ept, EptNode, NodeId};
use crate::tree::{EdgeRef, InputTree, Restriction, VertexId};
use crate::weight::Weight;

/// One component hanging off a centroid: reached through `neighbor`, with
/// its total vertex weight and vertex count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IncidenceEntry {
    pub neighbor: VertexId,
    pub weight: Weight,
    pub count: u32,
}

/// Components incident to a centroid, heaviest first; equal weights keep
/// ascending neighbor order, which matches the lexicographic edge tie rule
/// for edges sharing the centroid endpoint.
#[derive(Clone, Debug)]
pub struct SortedIncidence {
    pub centroid: VertexId,
    pub entries: Vec<IncidenceEntry>,
}

/// Orders the incident components by decreasing weight. With unit weights a
/// component's weight is its vertex count, and counts summing to the
/// component size admit only O(sqrt) distinct values, so bucketing entries
/// by count and sorting just the distinct counts beats a comparison sort.
pub fn sort_incident_components(
    centroid: VertexId,
    mut entries: Vec<IncidenceEntry>,
    unit_weights: bool,
) -> SortedIncidence {
    entries.sort_unstable_by_key(|e| e.neighbor);
    if unit_weights {
        let total: u64 = entries.iter().map(|e| e.weight.get()).sum();
        let max = entries.iter().map(|e| e.weight.get() as usize).max().unwrap_or(0);
        let mut buckets: Vec<Vec<IncidenceEntry>> = vec![Vec::new(); max + 1];
        let mut distinct: Vec<usize> = Vec::new();
        for e in entries {
            debug_assert_eq!(e.weight.get(), e.count as u64);
            let size = e.weight.get() as usize;
            if buckets[size].is_empty() {
                distinct.push(size);
            }
            buckets[size].push(e);
        }
        let t = distinct.len() as u64;
        debug_assert!(t * (t + 1) / 2 <= total, "distinct sizes exceed the sqrt bound");
        distinct.sort_unstable_by(|a, b| b.cmp(a));
        let mut sorted = Vec::with_capacity(buckets.iter().map(Vec::len).sum());
        for size in distinct {
            sorted.append(&mut buckets[size]);
        }
        entries = sorted;
    } else {
        entries.sort_unstable_by(|a, b| {
            b.weight.cmp(&a.weight).then(a.neighbor.cmp(&b.neighbor))
        });
    }
    SortedIncidence { centroid, entries }
}

/// Chain length for one caterpillar step: the smallest `s >= 1` after which
/// the remaining weight is less than twice the weight of the s-th component
/// split off. Splitting off that prefix leaves under two thirds of the
/// component's weight. When even the full list never satisfies the rule (the
/// centroid itself carries most of the weight) the whole list is used and
/// only the centroid remains.
pub fn caterpillar_prefix(inc: &SortedIncidence, total: Weight) -> usize {
    assert!(!inc.entries.is_empty(), "centroid with no incident components");
    let mut rem = total.get();
    for (i, e) in inc.entries.iter().enumerate() {
        rem -= e.weight.get();
        if (rem as u128) < 2 * e.weight.get() as u128 {
            return i + 1;
        }
    }
    inc.entries.len()
}

/// Arena slot a finished node links into: a parent node and side, or the
/// root.
type Slot = Option<(usize, bool)>;

fn push_node(nodes: &mut Vec<EptNode>, node: EptNode, slot: Slot, root: &mut NodeId) -> usize {
    let id = nodes.len();
    nodes.push(node);
    match slot {
        None => *root = NodeId(id as u32),
        Some((parent, right_side)) => match &mut nodes[parent] {
            EptNode::Internal { left, right, .. } => {
                let target = if right_side { right } else { left };
                debug_assert_eq!(*target, NodeId(u32::MAX), "slot filled twice");
                *target = NodeId(id as u32);
            }
            EptNode::Leaf(_) => unreachable!("leaf cannot be a parent"),
        },
    }
    id
}

fn placeholder(edge: EdgeRef) -> EptNode {
    EptNode::Internal {
        edge,
        left: NodeId(u32::MAX),
        right: NodeId(u32::MAX),
    }
}

/// Builds the balanced EPT by repeatedly cutting a most-balanced edge. Every
/// recursion step materializes fresh restrictions and rescans them, so the
/// whole build is Theta(n^2) on paths — the reference both for output
/// agreement and for the benchmark's speedup measurements.
pub fn build_balanced_naive(g: &InputTree) -> Ept {
    if g.n() == 1 {
        return Ept::single_leaf(VertexId(0));
    }
    let mut nodes: Vec<EptNode> = Vec::with_capacity(2 * g.n() - 1);
    let mut root = NodeId(0);
    let mut work: Vec<(Restriction, Slot)> = vec![(Restriction::full(g), None)];
    while let Some((r, slot)) = work.pop() {
        if r.len() == 1 {
            push_node(&mut nodes, EptNode::Leaf(r.members()[0]), slot, &mut root);
            continue;
        }
        let cut = g
            .find_balanced_edge(&r)
            .expect("restrictions stay connected with >= 2 vertices");
        let e = cut.edge;
        let id = push_node(&mut nodes, placeholder(e), slot, &mut root);
        let eid = g.edge_id(e).expect("cut edge comes from the tree");
        let (side_u, in_u) = side_members(g, &r, e.u(), eid);
        let side_v: Vec<VertexId> = r
            .members()
            .iter()
            .copied()
            .filter(|v| !in_u[v.index()])
            .collect();
        let ru = Restriction::from_vertices(g, &side_u).expect("cut side is a valid restriction");
        let rv = Restriction::from_vertices(g, &side_v).expect("cut side is a valid restriction");
        work.push((rv, Some((id, true))));
        work.push((ru, Some((id, false))));
    }
    Ept::from_parts(nodes, root)
}

/// Vertices of the component of the restriction minus edge `eid` containing
/// `from`, plus their membership mask.
fn side_members(
    g: &InputTree,
    r: &Restriction,
    from: VertexId,
    eid: usize,
) -> (Vec<VertexId>, Vec<bool>) {
    let mut mask = vec![false; g.n()];
    mask[from.index()] = true;
    let mut out = vec![from];
    let mut i = 0;
    while i < out.len() {
        let v = out[i];
        i += 1;
        for (nbr, id) in g.neighbors_with_edges(v) {
            if id as usize != eid && r.contains(nbr) && !mask[nbr.index()] {
                mask[nbr.index()] = true;
                out.push(nbr);
            }
        }
    }
    (out, mask)
}

struct Item {
    rep: VertexId,
    weight: u64,
    count: u32,
    depth: u32,
    slot: Slot,
}

/// Builds the same balanced EPT as `build_balanced_naive` in O(n log n) via
/// centroid caterpillar chains. Cut edges are marked in place instead of
/// copying vertex subsets, so each recursion step costs time linear in its
/// own component, and component weights shrink by a factor of 2/3 per level.
pub fn build_balanced_fast(g: &InputTree) -> Ept {
    let n = g.n();
    if n == 1 {
        return Ept::single_leaf(VertexId(0));
    }
    let careful = g.has_zero_weight();
    let unit = g.unit_weights();
    // weight_chain[d] bounds the weight of any depth-d component still being
    // recursed on (each level retains under 2/3 of the integer weight
    // above it); holds whenever no weight is zero.
    let weight_chain: Vec<u64> = {
        let mut chain = vec![g.total_weight().get()];
        while *chain.last().unwrap() > 1 {
            let w = *chain.last().unwrap() as u128;
            chain.push(((2 * w + 2) / 3 - 1) as u64);
        }
        chain
    };

    let mut cut = vec![false; n - 1];
    let mut parent: Vec<u32> = vec![u32::MAX; n];
    let mut sub_w: Vec<u64> = vec![0; n];
    let mut sub_cnt: Vec<u32> = vec![0; n];
    let mut order: Vec<VertexId> = Vec::with_capacity(n);

    let mut nodes: Vec<EptNode> = Vec::with_capacity(2 * n - 1);
    let mut root = NodeId(0);
    let mut work = vec![Item {
        rep: VertexId(0),
        weight: g.total_weight().get(),
        count: n as u32,
        depth: 0,
        slot: None,
    }];
    while let Some(item) = work.pop() {
        if item.count == 1 {
            push_node(&mut nodes, EptNode::Leaf(item.rep), item.slot, &mut root);
            continue;
        }
        debug_assert!(
            careful
                || ((item.depth as usize) < weight_chain.len()
                    && item.weight <= weight_chain[item.depth as usize]),
            "component at depth {} weighs {}, past the geometric-decrease bound",
            item.depth,
            item.weight,
        );

        // Rooted scan of this component; cut edges are its boundary.
        order.clear();
        order.push(item.rep);
        parent[item.rep.index()] = u32::MAX;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for (nbr, eid) in g.neighbors_with_edges(v) {
                if cut[eid as usize] || nbr.0 == parent[v.index()] {
                    continue;
                }
                parent[nbr.index()] = v.0;
                order.push(nbr);
            }
        }
        debug_assert_eq!(order.len(), item.count as usize);
        for &v in &order {
            sub_w[v.index()] = g.vertex_weight(v).get();
            sub_cnt[v.index()] = 1;
        }
        for &v in order.iter().rev() {
            let p = parent[v.index()];
            if p != u32::MAX {
                sub_w[p as usize] += sub_w[v.index()];
                sub_cnt[p as usize] += sub_cnt[v.index()];
            }
        }
        let total = item.weight;
        debug_assert_eq!(sub_w[item.rep.index()], total);

        if careful {
            // Mirror the naive argmin over every edge of the component.
            let mut best: Option<(u64, EdgeRef)> = None;
            for &v in &order {
                let p = parent[v.index()];
                if p == u32::MAX {
                    continue;
                }
                let e = EdgeRef::new(v, VertexId(p));
                let down = sub_w[v.index()];
                let key = (down.max(total - down), e);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
            let (_, e) = best.expect("component with >= 2 vertices has an edge");
            let id = push_node(&mut nodes, placeholder(e), item.slot, &mut root);
            cut[g.edge_id(e).expect("edge of the tree") as usize] = true;
            let child = if parent[e.u().index()] == e.v().0 { e.u() } else { e.v() };
            let par = VertexId(parent[child.index()]);
            work.push(Item {
                rep: par,
                weight: total - sub_w[child.index()],
                count: item.count - sub_cnt[child.index()],
                depth: item.depth + 1,
                slot: Some((id, true)),
            });
            work.push(Item {
                rep: child,
                weight: sub_w[child.index()],
                count: sub_cnt[child.index()],
                depth: item.depth + 1,
                slot: Some((id, false)),
            });
            continue;
        }

        // Smallest-index vertex no remaining component of which outweighs
        // half the total.
        let mut centroid: Option<VertexId> = None;
        for &v in &order {
            let mut max_comp = total - sub_w[v.index()];
            for (nbr, eid) in g.neighbors_with_edges(v) {
                if !cut[eid as usize] && parent[nbr.index()] == v.0 {
                    max_comp = max_comp.max(sub_w[nbr.index()]);
                }
            }
            if (max_comp as u128) * 2 <= total as u128 {
                centroid = Some(match centroid {
                    None => v,
                    Some(c) => c.min(v),
                });
            }
        }
        let c = centroid.expect("a tree always has a weight centroid");

        let mut entries = Vec::new();
        for (nbr, eid) in g.neighbors_with_edges(c) {
            if cut[eid as usize] {
                continue;
            }
            let (w, cnt) = if parent[nbr.index()] == c.0 {
                (sub_w[nbr.index()], sub_cnt[nbr.index()])
            } else {
                debug_assert_eq!(nbr.0, parent[c.index()]);
                (total - sub_w[c.index()], item.count - sub_cnt[c.index()])
            };
            entries.push(IncidenceEntry {
                neighbor: nbr,
                weight: Weight::new(w),
                count: cnt,
            });
        }
        let inc = sort_incident_components(c, entries, unit);
        let s = caterpillar_prefix(&inc, Weight::new(total));

        let mut slot = item.slot;
        let mut rem_w = total;
        let mut rem_c = item.count;
        for entry in inc.entries.iter().take(s) {
            let e = EdgeRef::new(c, entry.neighbor);
            let id = push_node(&mut nodes, placeholder(e), slot, &mut root);
            cut[g.edge_id(e).expect("edge of the tree") as usize] = true;
            work.push(Item {
                rep: entry.neighbor,
                weight: entry.weight.get(),
                count: entry.count,
                depth: item.depth + 1,
                slot: Some((id, false)),
            });
            rem_w -= entry.weight.get();
            rem_c -= entry.count;
            slot = Some((id, true));
        }
        debug_assert!(rem_c >= 1);
        work.push(Item {
            rep: c,
            weight: rem_w,
            count: rem_c,
            depth: item.depth + 1,
            slot,
        });
    }
    Ept::from_parts(nodes, root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ept::{ept_sum_edges, validate_ept};

    fn path(n: usize) -> InputTree {
        let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (v - 1, v)).collect();
        InputTree::from_edges(n, &edges).unwrap()
    }

    fn star(n: usize) -> InputTree {
        let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (0, v)).collect();
        InputTree::from_edges(n, &edges).unwrap()
    }

    fn entry(neighbor: u32, weight: u64, count: u32) -> IncidenceEntry {
        IncidenceEntry {
            neighbor: VertexId(neighbor),
            weight: Weight::new(weight),
            count,
        }
    }

    #[test]
    fn sort_unit_buckets_by_count() {
        let inc = sort_incident_components(
            VertexId(0),
            vec![entry(3, 1, 1), entry(1, 2, 2), entry(2, 1, 1), entry(4, 2, 2)],
            true,
        );
        let order: Vec<u32> = inc.entries.iter().map(|e| e.neighbor.0).collect();
        assert_eq!(order, vec![1, 4, 2, 3]);
    }

    #[test]
    fn sort_weighted_ties_by_neighbor() {
        let inc = sort_incident_components(
            VertexId(5),
            vec![entry(9, 7, 1), entry(2, 7, 3), entry(4, 10, 2)],
            false,
        );
        let order: Vec<u32> = inc.entries.iter().map(|e| e.neighbor.0).collect();
        assert_eq!(order, vec![4, 2, 9]);
    }

    #[test]
    fn prefix_star() {
        // Star on 4 vertices: three unit components, total 4; the remainder
        // only drops below twice the current component at s = 3.
        let inc = sort_incident_components(
            VertexId(0),
            vec![entry(1, 1, 1), entry(2, 1, 1), entry(3, 1, 1)],
            true,
        );
        assert_eq!(caterpillar_prefix(&inc, Weight::new(4)), 3);
    }

    #[test]
    fn prefix_spider() {
        // Components of weight 3, 2, 2 around a unit centroid: splitting off
        // the heaviest leaves 5 < 6, so the chain stops at s = 1.
        let inc = sort_incident_components(
            VertexId(0),
            vec![entry(1, 3, 3), entry(4, 2, 2), entry(6, 2, 2)],
            true,
        );
        assert_eq!(caterpillar_prefix(&inc, Weight::new(8)), 1);
    }

    #[test]
    fn prefix_p3() {
        let inc = sort_incident_components(
            VertexId(1),
            vec![entry(0, 1, 1), entry(2, 1, 1)],
            true,
        );
        assert_eq!(caterpillar_prefix(&inc, Weight::new(3)), 2);
    }

    #[test]
    fn prefix_heavy_centroid_exhausts_the_list() {
        // Weights 100 at the centroid, 1 per leaf: no prefix ever satisfies
        // the rule, so the whole incidence list becomes the chain.
        let inc = sort_incident_components(
            VertexId(0),
            vec![entry(1, 1, 1), entry(2, 1, 1), entry(3, 1, 1)],
            false,
        );
        assert_eq!(caterpillar_prefix(&inc, Weight::new(103)), 3);
    }

    #[test]
    fn naive_p4() {
        let g = path(4);
        let t = build_balanced_naive(&g);
        assert_eq!(validate_ept(&g, &t), Ok(()));
        assert_eq!(ept_sum_edges(&g, &t).unwrap().total, Weight::new(8));
        let EptNode::Internal { edge, .. } = *t.node(t.root()) else {
            panic!("n >= 2 has an internal root")
        };
        assert_eq!(edge, EdgeRef::of(1, 2));
    }

    #[test]
    fn naive_star4() {
        let g = star(4);
        let t = build_balanced_naive(&g);
        assert_eq!(validate_ept(&g, &t), Ok(()));
        assert_eq!(ept_sum_edges(&g, &t).unwrap().total, Weight::new(9));
    }

    #[test]
    fn naive_weighted_p3() {
        // Weights 5,1,1: the cut (0,1) isolates the heavy vertex at depth 1.
        let g = InputTree::parse("tree 3\nedge 0 1\nedge 1 2\nweight 0 5\n").unwrap();
        let t = build_balanced_naive(&g);
        let EptNode::Internal { edge, .. } = *t.node(t.root()) else {
            panic!()
        };
        assert_eq!(edge, EdgeRef::of(0, 1));
        assert_eq!(ept_sum_edges(&g, &t).unwrap().total, Weight::new(9));
    }

    #[test]
    fn fast_matches_naive_on_smalls() {
        for g in [path(2), path(3), path(4), path(9), star(4), star(9)] {
            let naive = build_balanced_naive(&g);
            let fast = build_balanced_fast(&g);
            assert_eq!(fast, naive);
            assert_eq!(fast.to_json(), naive.to_json());
        }
    }

    #[test]
    fn fast_matches_naive_on_path_1024() {
        let g = path(1024);
        let naive = build_balanced_naive(&g);
        let fast = build_balanced_fast(&g);
        assert_eq!(validate_ept(&g, &fast), Ok(()));
        assert_eq!(fast.to_json(), naive.to_json());
    }

    #[test]
    fn fast_matches_naive_weighted() {
        let texts = [
            "tree 3\nedge 0 1\nedge 1 2\nweight 0 5\n",
            "tree 4\nedge 0 1\nedge 0 2\nedge 0 3\nweight 0 100\n",
            "tree 5\nedge 0 1\nedge 1 2\nedge 2 3\nedge 3 4\nweight 1 9\nweight 3 9\n",
            "tree 6\nedge 0 1\nedge 0 2\nedge 1 3\nedge 1 4\nedge 2 5\nweight 5 7\n",
        ];
        for text in texts {
            let g = InputTree::parse(text).unwrap();
            let naive = build_balanced_naive(&g);
            let fast = build_balanced_fast(&g);
            assert_eq!(validate_ept(&g, &fast), Ok(()));
            assert_eq!(fast.to_json(), naive.to_json(), "disagree on {text}");
        }
    }

    #[test]
    fn fast_matches_naive_with_zero_weights() {
        let texts = [
            "tree 3\nedge 0 1\nedge 1 2\nweight 0 0\nweight 1 0\n",
            "tree 4\nedge 0 1\nedge 1 2\nedge 2 3\nweight 1 0\nweight 2 0\n",
            "tree 5\nedge 0 1\nedge 0 2\nedge 0 3\nedge 0 4\nweight 0 0\nweight 3 0\n",
        ];
        for text in texts {
            let g = InputTree::parse(text).unwrap();
            let naive = build_balanced_naive(&g);
            let fast = build_balanced_fast(&g);
            assert_eq!(validate_ept(&g, &fast), Ok(()));
            assert_eq!(fast.to_json(), naive.to_json(), "disagree on {text}");
        }
    }

    #[test]
    fn single_vertex() {
        let g = InputTree::from_edges(1, &[]).unwrap();
        assert_eq!(build_balanced_naive(&g), Ept::single_leaf(VertexId(0)));
        assert_eq!(build_balanced_fast(&g), Ept::single_leaf(VertexId(0)));
    }

    #[test]
    fn fast_matches_naive_exhaustively_to_n7() {
        for n in 2..=7 {
            for g in crate::oracle::enumerate_labeled_trees(n).unwrap() {
                let naive = build_balanced_naive(&g);
                let fast = build_balanced_fast(&g);
                assert_eq!(
                    fast.to_json(),
                    naive.to_json(),
                    "disagree on {}",
                    g.to_text()
                );
                assert_eq!(validate_ept(&g, &fast), Ok(()));
            }
        }
    }

    #[test]
    fn fast_matches_naive_on_random_weighted_instances() {
        use crate::oracle::{random_tree, random_weights, SplitMix64};
        let mut rng = SplitMix64::new(99);
        for _ in 0..150 {
            let n = 2 + (rng.next_below(30) as usize);
            let g = random_tree(n, rng.next_u64()).unwrap();
            let g = random_weights(&g, 1, 1 + rng.next_below(1000), rng.next_u64()).unwrap();
            let naive = build_balanced_naive(&g);
            let fast = build_balanced_fast(&g);
            assert_eq!(fast.to_json(), naive.to_json(), "disagree on {}", g.to_text());
        }
    }
}
