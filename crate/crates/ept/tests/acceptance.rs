//! Acceptance suite: ten criteria, one PASS/FAIL line each, nonzero exit if
//! any fail. Every numeric expectation here is frozen from hand computation
//! or a pinned deterministic run, so regressions show up as value drift, not
//! just as crashes.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use ept::{
    aug_sum, augment, build_balanced_fast, build_balanced_naive, correctly_placed_all,
    enumerate_labeled_trees, ept_sum_edges, ept_sum_leaves, optimal_ept_sum,
    optimal_ept_sum_with_cap, ratio_records_csv, run_bench, run_ratio_exhaustive,
    run_ratio_random, split, validate_ept, BenchConfig, BenchShape, EdgeRef, Ept, EptNode,
    EptViolation, ExhaustiveRatioConfig, InputTree, JsonError, OracleError, RandomRatioConfig,
    RatioSweep, Restriction, SplitMix64, TreeError, VertexId, Weight, WeightMode,
};

const P3: &str = "tree 3\nedge 0 1\nedge 1 2\n";
const P4: &str = "tree 4\nedge 0 1\nedge 1 2\nedge 2 3\n";
const STAR4: &str = "tree 4\nedge 0 1\nedge 0 2\nedge 0 3\n";
const P3W: &str = "tree 3\nedge 0 1\nedge 1 2\nweight 0 2\nweight 1 3\nweight 2 4\n";
const P3E: &str = "tree 3\nedge 0 1\nedge 1 2\neweight 0 1 2\neweight 1 2 3\n";

fn main() {
    let criteria: &[(&str, fn() -> Result<(), String>)] = &[
        ("tree model: text format round-trips; malformed input rejected with precise errors", c01_tree_model),
        ("ept model: both cost definitions agree; validation catches corrupted trees", c02_ept_model),
        ("naive builder: always cuts a most-balanced edge, ties to the smallest edge", c03_naive_builder),
        ("fast builder: output identical to naive on exhaustive, weighted, and zero-weight instances", c04_fast_equivalence),
        ("exact oracle: frozen optima, valid certificates, caps enforced", c05_oracle),
        ("augmentation: cost within 3/2 of the source tree; erasure restores it", c06_augmentation),
        ("splitting: parts are valid, partition the vertices, and never cost more", c07_splitting),
        ("construction complexity: naive grows quadratically, fast quasi-linearly", c08_complexity),
        ("independent enumeration: brute-force minimum over all EPTs equals the oracle", c09_enumeration),
        ("approximation ratio: balanced within 3/2 of optimal; sweeps reproduce frozen maxima", c10_ratio),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(Ok(())) => println!("PASS {:2}/10 {name}", i + 1),
            Ok(Err(msg)) => {
                failed += 1;
                println!("FAIL {:2}/10 {name}: {msg}", i + 1);
            }
            Err(panic) => {
                failed += 1;
                let msg = panic
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "opaque panic".to_string());
                println!("FAIL {:2}/10 {name}: panic: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all 10 criteria passed");
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn er(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn tree(text: &str) -> InputTree {
    InputTree::parse(text).expect("fixture parses")
}

/// Deterministic weighted variant of `g` (weights 1..=hi).
fn weighted(g: &InputTree, hi: u64, seed: u64) -> InputTree {
    ept::random_weights(g, 1, hi, seed).expect("weight range is valid")
}

// ---------------------------------------------------------------- criterion 1

fn c01_tree_model() -> Result<(), String> {
    // Canonical serialization, exact bytes.
    ensure(
        tree("tree 2\nedge 0 1\n").to_text() == "tree 2\nedge 0 1\n",
        "unit-weight serialization changed",
    )?;
    let g = tree("# hello\ntree 3\n\nedge 1 2\nedge 0 1\nweight 1 7\neweight 1 2 3\n");
    ensure(
        InputTree::parse(&g.to_text()).map_err(er)? == g,
        "text round-trip lost information",
    )?;
    ensure(g.total_weight() == Weight::new(9), "weights did not apply")?;
    ensure(
        g.edge_weight(EdgeRef::of(2, 1)).map_err(er)? == Weight::new(3),
        "edge weight lookup failed through canonicalization",
    )?;
    // Round-trip a richer corpus, including every-weight-set instances.
    for text in [P3, P4, STAR4, P3W, P3E, "tree 1\n", "tree 1\nweight 0 44\n"] {
        let g = tree(text);
        ensure(
            InputTree::parse(&g.to_text()).map_err(er)? == g,
            format!("round trip failed for {text:?}"),
        )?;
    }
    // An explicit all-ones edge weighting is the same object as no edge
    // weights at all.
    ensure(
        tree("tree 2\nedge 0 1\neweight 0 1 1\n") == tree("tree 2\nedge 0 1\n"),
        "all-ones edge weights must normalize away",
    )?;

    let parse_err = |text: &str| InputTree::parse(text).err();
    ensure(
        matches!(parse_err("tre 3\n"), Some(TreeError::Syntax { line: 1, .. })),
        "bad keyword not a syntax error",
    )?;
    ensure(
        matches!(parse_err("tree 0\n"), Some(TreeError::Syntax { line: 1, .. })),
        "empty tree accepted by the parser",
    )?;
    ensure(
        matches!(InputTree::from_edges(0, &[]), Err(TreeError::NoVertices)),
        "empty tree accepted by the constructor",
    )?;
    ensure(
        matches!(
            parse_err("tree 3\nedge 0 5\nedge 1 2\n"),
            Some(TreeError::VertexOutOfRange { v: 5, n: 3 })
        ),
        "out-of-range vertex accepted",
    )?;
    ensure(
        matches!(parse_err("tree 3\nedge 1 1\nedge 0 1\n"), Some(TreeError::SelfLoop(_))),
        "self-loop accepted",
    )?;
    ensure(
        matches!(
            parse_err("tree 3\nedge 0 1\nedge 1 0\n"),
            Some(TreeError::DuplicateEdge(_))
        ),
        "reversed duplicate edge accepted",
    )?;
    ensure(
        matches!(
            parse_err("tree 3\nedge 0 1\n"),
            Some(TreeError::WrongEdgeCount { expected: 2, found: 1 })
        ),
        "missing edge accepted",
    )?;
    ensure(
        matches!(
            parse_err("tree 4\nedge 0 1\nedge 1 2\nedge 0 2\n"),
            Some(TreeError::Disconnected)
        ),
        "cycle plus isolated vertex accepted",
    )?;
    ensure(
        matches!(
            parse_err("tree 2\nedge 0 1\nweight 0 0\nweight 1 0\n"),
            Some(TreeError::ZeroTotalWeight)
        ),
        "all-zero weights accepted",
    )?;
    ensure(
        matches!(
            parse_err("tree 2\nedge 0 1\neweight 0 1 0\n"),
            Some(TreeError::ZeroEdgeWeight(_))
        ),
        "zero edge weight accepted",
    )?;
    ensure(
        matches!(
            parse_err("tree 3\nedge 0 1\nedge 1 2\neweight 0 2 4\n"),
            Some(TreeError::NotAnEdge(_))
        ),
        "edge weight on a non-edge accepted",
    )?;

    let p3 = tree(P3);
    ensure(
        matches!(
            p3.with_vertex_weights(vec![Weight::ONE; 2]),
            Err(TreeError::WrongWeightCount { expected: 3, found: 2 })
        ),
        "short weight vector accepted",
    )?;
    ensure(
        matches!(
            p3.with_vertex_weights(vec![Weight::new(u64::MAX), Weight::ONE, Weight::ONE]),
            Err(TreeError::WeightOverflow)
        ),
        "overflowing total accepted",
    )?;
    ensure(
        matches!(
            ept::prufer_decode(&[0], 4),
            Err(TreeError::PruferLength { n: 4, expected: 2, found: 1 })
        ),
        "short Pruefer sequence accepted",
    )?;
    ensure(
        matches!(
            ept::random_weights(&p3, 0, 5, 1),
            Err(TreeError::WeightRange { lo: 0, hi: 5 })
        ),
        "zero lower weight bound accepted",
    )?;

    // Restriction-level errors.
    ensure(
        matches!(
            Restriction::from_vertices(&p3, &[]),
            Err(TreeError::EmptyRestriction)
        ),
        "empty restriction accepted",
    )?;
    ensure(
        matches!(
            Restriction::from_vertices(&p3, &[VertexId(1), VertexId(1)]),
            Err(TreeError::DuplicateInRestriction(VertexId(1)))
        ),
        "duplicate member accepted",
    )?;
    let singleton = Restriction::from_vertices(&p3, &[VertexId(0)]).map_err(er)?;
    ensure(
        matches!(
            p3.component_weights(&singleton, EdgeRef::of(0, 1)),
            Err(TreeError::RestrictionTooSmall)
        ),
        "cut of a singleton accepted",
    )?;
    let pair = Restriction::from_vertices(&p3, &[VertexId(0), VertexId(1)]).map_err(er)?;
    ensure(
        matches!(
            p3.component_weights(&pair, EdgeRef::of(1, 2)),
            Err(TreeError::EdgeNotInRestriction(_))
        ),
        "cut at an edge leaving the restriction accepted",
    )?;
    let gap = Restriction::from_vertices(&p3, &[VertexId(0), VertexId(2)]).map_err(er)?;
    ensure(
        matches!(p3.find_centroid(&gap), Err(TreeError::DisconnectedRestriction)),
        "disconnected restriction accepted",
    )?;
    Ok(())
}

// ---------------------------------------------------------------- criterion 2

fn c02_ept_model() -> Result<(), String> {
    // Frozen cost of the balanced EPT of an unweighted path on three
    // vertices: root (0,1) charges 3, its child (1,2) charges 2.
    let p3 = tree(P3);
    let t3 = build_balanced_fast(&p3);
    let breakdown = ept_sum_edges(&p3, &t3).map_err(er)?;
    let expected: BTreeMap<EdgeRef, Weight> = [
        (EdgeRef::of(0, 1), Weight::new(3)),
        (EdgeRef::of(1, 2), Weight::new(2)),
    ]
    .into_iter()
    .collect();
    ensure(breakdown.total == Weight::new(5), "P3 cost drifted")?;
    ensure(breakdown.per_internal_node == expected, "P3 charges drifted")?;

    // Both definitions agree everywhere, including vertex and edge weights.
    for text in [P3, P4, STAR4, P3W, P3E, "tree 1\n"] {
        let g = tree(text);
        let t = build_balanced_fast(&g);
        validate_ept(&g, &t).map_err(er)?;
        let by_edges = ept_sum_edges(&g, &t).map_err(er)?.total;
        let by_leaves = ept_sum_leaves(&g, &t).map_err(er)?;
        ensure(by_edges == by_leaves, format!("definitions disagree on {text:?}"))?;
    }
    let p3e = tree(P3E);
    ensure(
        ept_sum_edges(&p3e, &build_balanced_fast(&p3e)).map_err(er)?.total == Weight::new(12),
        "edge-weighted P3 cost drifted",
    )?;

    // Tampered structures are rejected with the matching violation.
    let p4 = tree(P4);
    let canonical = "{\"edge\":[1,2],\"left\":{\"edge\":[0,1],\"left\":{\"vertex\":0},\"right\":{\"vertex\":1}},\"right\":{\"edge\":[2,3],\"left\":{\"vertex\":2},\"right\":{\"vertex\":3}}}";
    let good = Ept::from_json(canonical).map_err(er)?;
    validate_ept(&p4, &good).map_err(er)?;
    ensure(good.to_json() == canonical, "canonical JSON not stable")?;
    ensure(good == build_balanced_fast(&p4), "canonical P4 EPT drifted")?;

    let check = |json: &str, what: &str, pred: fn(&EptViolation) -> bool| -> Result<(), String> {
        let t = Ept::from_json(json).map_err(er)?;
        match validate_ept(&p4, &t) {
            Err(ref v) if pred(v) => Ok(()),
            Err(v) => Err(format!("{what}: wrong violation {v}")),
            Ok(()) => Err(format!("{what}: accepted")),
        }
    };
    check(
        &canonical.replace("{\"vertex\":3}", "{\"vertex\":0}"),
        "duplicate leaf",
        |v| matches!(v, EptViolation::LeafBijection(_)),
    )?;
    check(
        &canonical.replace("{\"vertex\":3}", "{\"vertex\":9}"),
        "foreign leaf",
        |v| matches!(v, EptViolation::LeafBijection(_)),
    )?;
    check(
        &canonical.replace("\"edge\":[2,3]", "\"edge\":[0,1]"),
        "repeated edge",
        |v| matches!(v, EptViolation::EdgeBijection(_)),
    )?;
    check(
        &canonical.replace("\"edge\":[2,3]", "\"edge\":[0,3]"),
        "non-edge",
        |v| matches!(v, EptViolation::EdgeBijection(_)),
    )?;
    // Valid leaf and edge multisets, but leaves 1 and 2 sit on the wrong
    // sides of the root cut.
    check(
        "{\"edge\":[1,2],\"left\":{\"edge\":[0,1],\"left\":{\"vertex\":0},\"right\":{\"vertex\":2}},\"right\":{\"edge\":[2,3],\"left\":{\"vertex\":1},\"right\":{\"vertex\":3}}}",
        "wrong partition",
        |v| matches!(v, EptViolation::Partition { .. }),
    )?;
    // An EPT of the wrong tree fails against this one.
    ensure(
        matches!(validate_ept(&p4, &t3), Err(EptViolation::LeafBijection(_))),
        "EPT of a smaller tree accepted",
    )?;
    // Swapped children normalize on parse rather than surviving as a
    // non-canonical arena.
    let swapped = canonical.replace(
        "\"left\":{\"vertex\":0},\"right\":{\"vertex\":1}",
        "\"left\":{\"vertex\":1},\"right\":{\"vertex\":0}",
    );
    ensure(
        Ept::from_json(&swapped).map_err(er)?.to_json() == canonical,
        "child order did not normalize on parse",
    )?;
    ensure(
        matches!(Ept::from_json("{\"subdiv\":{\"vertex\":0}}"), Err(JsonError::UnexpectedSubdiv)),
        "subdivision node accepted in a plain EPT",
    )?;

    // Single vertex: one leaf, zero cost.
    let one = tree("tree 1\n");
    let leaf = Ept::from_json("{\"vertex\":0}").map_err(er)?;
    validate_ept(&one, &leaf).map_err(er)?;
    ensure(
        ept_sum_edges(&one, &leaf).map_err(er)?.total == Weight::ZERO,
        "single leaf has nonzero cost",
    )?;
    Ok(())
}

// ---------------------------------------------------------------- criterion 3

/// The root of any balanced EPT must cut an edge minimizing the heavier side,
/// ties broken toward the smallest edge. Recomputed here from raw cuts,
/// independent of the builder's own selection routine.
fn root_is_balanced_argmin(g: &InputTree, t: &Ept) -> Result<(), String> {
    let EptNode::Internal { edge: root, .. } = *t.node(t.root()) else {
        return ensure(g.n() == 1, "leaf root on a multi-vertex tree");
    };
    let full = Restriction::full(g);
    let mut best: Option<(Weight, EdgeRef)> = None;
    for &e in g.edges() {
        let cut = g.component_weights(&full, e).map_err(er)?;
        let key = (cut.max_side, e);
        if best.map_or(true, |b| key < b) {
            best = Some(key);
        }
    }
    let root_cut = g.component_weights(&full, root).map_err(er)?;
    ensure(
        best == Some((root_cut.max_side, root)),
        format!("root {root} is not the tie-broken argmin {best:?}"),
    )
}

fn naive_instance_checks(g: &InputTree) -> Result<(), String> {
    let t = build_balanced_naive(g);
    validate_ept(g, &t).map_err(er)?;
    ensure(correctly_placed_all(g, &t), "a vertex is not correctly placed")?;
    let c1 = ept_sum_edges(g, &t).map_err(er)?.total;
    let c2 = ept_sum_leaves(g, &t).map_err(er)?;
    ensure(c1 == c2, "cost definitions disagree")?;
    root_is_balanced_argmin(g, &t)
}

fn c03_naive_builder() -> Result<(), String> {
    // Frozen shapes: root edge and total cost.
    for (text, root, cost) in [
        (P4, EdgeRef::of(1, 2), 8),
        (STAR4, EdgeRef::of(0, 1), 9),
        (P3W, EdgeRef::of(1, 2), 14),
        (P3E, EdgeRef::of(0, 1), 12),
    ] {
        let g = tree(text);
        let t = build_balanced_naive(&g);
        let EptNode::Internal { edge, .. } = *t.node(t.root()) else {
            return Err("root is a leaf".to_string());
        };
        ensure(edge == root, format!("{text:?}: root {edge}, expected {root}"))?;
        ensure(
            ept_sum_edges(&g, &t).map_err(er)?.total == Weight::new(cost),
            format!("{text:?}: cost drifted from {cost}"),
        )?;
    }

    for n in 2..=6 {
        for g in enumerate_labeled_trees(n).map_err(er)? {
            naive_instance_checks(&g).map_err(|m| format!("unit n={n}: {m}"))?;
        }
    }
    let mut rng = SplitMix64::new(0x3a11);
    for t in 0..100u64 {
        let n = 2 + (t % 15) as usize;
        let g = ept::random_tree(n, rng.next_u64()).map_err(er)?;
        let g = weighted(&g, 1000, rng.next_u64());
        naive_instance_checks(&g).map_err(|m| format!("weighted n={n}: {m}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 4

fn c04_fast_equivalence() -> Result<(), String> {
    // Every labeled tree through seven vertices, unit weights.
    for n in 2..=7 {
        let mut count = 0u64;
        for g in enumerate_labeled_trees(n).map_err(er)? {
            let fast = build_balanced_fast(&g);
            if fast != build_balanced_naive(&g) {
                return Err(format!("disagreement on unit tree:\n{}", g.to_text()));
            }
            count += 1;
        }
        ensure(
            count == ept::labeled_tree_count(n),
            format!("enumeration miscounted n={n}"),
        )?;
    }

    // Random vertex-weighted instances across a spread of sizes.
    let mut rng = SplitMix64::new(0xfa57);
    for t in 0..300u64 {
        let n = 2 + (t % 39) as usize;
        let g = ept::random_tree(n, rng.next_u64()).map_err(er)?;
        let g = weighted(&g, 1000, rng.next_u64());
        if build_balanced_fast(&g) != build_balanced_naive(&g) {
            return Err(format!("disagreement on weighted tree:\n{}", g.to_text()));
        }
    }

    // Zero weights void the balance guarantee but never the equivalence:
    // the fast builder must fall back to exactly the naive selection.
    let mut rng = SplitMix64::new(0x0fae);
    for t in 0..150u64 {
        let n = 2 + (t % 24) as usize;
        let g = ept::random_tree(n, rng.next_u64()).map_err(er)?;
        let mut ws: Vec<Weight> = (0..n)
            .map(|_| {
                if rng.next_below(4) == 0 {
                    Weight::ZERO
                } else {
                    Weight::new(1 + rng.next_below(9))
                }
            })
            .collect();
        if ws.iter().all(|w| w.is_zero()) {
            ws[0] = Weight::ONE;
        }
        let g = g.with_vertex_weights(ws).map_err(er)?;
        let fast = build_balanced_fast(&g);
        if fast != build_balanced_naive(&g) {
            return Err(format!("disagreement on zero-stress tree:\n{}", g.to_text()));
        }
        validate_ept(&g, &fast).map_err(er)?;
    }

    // Byte identity of the serialized form, not just structural equality.
    let g = weighted(&ept::random_tree(33, 77).map_err(er)?, 500, 78);
    ensure(
        build_balanced_fast(&g).to_json() == build_balanced_naive(&g).to_json(),
        "serialized builders differ",
    )?;
    Ok(())
}

// ---------------------------------------------------------------- criterion 5

fn c05_oracle() -> Result<(), String> {
    for (text, want) in [(P3, 5), (P4, 8), (STAR4, 9), (P3W, 14), (P3E, 12)] {
        let g = tree(text);
        let (opt, cert) = optimal_ept_sum(&g).map_err(er)?;
        ensure(opt == Weight::new(want), format!("{text:?}: optimum drifted from {want}"))?;
        validate_ept(&g, &cert).map_err(er)?;
        ensure(
            ept_sum_edges(&g, &cert).map_err(er)?.total == opt,
            "certificate does not achieve the reported optimum",
        )?;
    }

    // The oracle never beats itself across representations and never loses
    // to the balanced construction.
    for n in 2..=6 {
        for (i, g) in enumerate_labeled_trees(n).map_err(er)?.enumerate() {
            for g in [g.clone(), weighted(&g, 20, (n as u64) << 32 | i as u64)] {
                let (opt, cert) = optimal_ept_sum(&g).map_err(er)?;
                validate_ept(&g, &cert).map_err(er)?;
                ensure(
                    ept_sum_edges(&g, &cert).map_err(er)?.total == opt,
                    "certificate cost mismatch",
                )?;
                let balanced = ept_sum_edges(&g, &build_balanced_fast(&g)).map_err(er)?.total;
                ensure(opt <= balanced, "balanced beat the oracle")?;
            }
        }
    }

    // Deterministic output: same instance, same certificate bytes.
    let g = weighted(&ept::random_tree(10, 4242).map_err(er)?, 100, 4243);
    let (a, ta) = optimal_ept_sum(&g).map_err(er)?;
    let (b, tb) = optimal_ept_sum(&g).map_err(er)?;
    ensure(a == b && ta.to_json() == tb.to_json(), "oracle output not deterministic")?;

    // Cap behavior: the default cap stops at 21 vertices, the hard cap at 64
    // regardless of the requested headroom.
    let long = |n: usize| {
        let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (v - 1, v)).collect();
        InputTree::from_edges(n, &edges).expect("path builds")
    };
    ensure(
        matches!(
            optimal_ept_sum(&long(21)),
            Err(OracleError::CapExceeded { n: 21, cap: 20 })
        ),
        "default cap not enforced",
    )?;
    ensure(
        matches!(
            optimal_ept_sum_with_cap(&long(70), 100),
            Err(OracleError::CapExceeded { n: 70, cap: 64 })
        ),
        "hard cap not enforced",
    )?;
    Ok(())
}

// ---------------------------------------------------------------- criterion 6

fn aug_instance_checks(g: &InputTree) -> Result<(), String> {
    let t = build_balanced_fast(g);
    let a = augment(g, &t).map_err(er)?;
    let cost = ept_sum_edges(g, &t).map_err(er)?.total.get() as u128;
    let aug = aug_sum(g, &a).map_err(er)?.get() as u128;
    ensure(cost <= aug, "augmentation lowered the cost")?;
    ensure(
        2 * aug <= 3 * cost,
        format!("augmented cost {aug} above 3/2 of {cost}"),
    )?;
    ensure(a.erase_subdivisions() == t, "erasure did not restore the source")?;
    Ok(())
}

fn c06_augmentation() -> Result<(), String> {
    // Frozen sums: single edge 3, path on three vertices 7, star 12.
    for (text, want) in [("tree 2\nedge 0 1\n", 3), (P3, 7), (STAR4, 12)] {
        let g = tree(text);
        let a = augment(&g, &build_balanced_fast(&g)).map_err(er)?;
        ensure(
            aug_sum(&g, &a).map_err(er)? == Weight::new(want),
            format!("{text:?}: augmented sum drifted from {want}"),
        )?;
    }
    for n in 2..=6 {
        for g in enumerate_labeled_trees(n).map_err(er)? {
            aug_instance_checks(&g).map_err(|m| format!("unit n={n}: {m}"))?;
        }
    }
    let mut rng = SplitMix64::new(0xa06);
    for t in 0..100u64 {
        let n = 2 + (t % 13) as usize;
        let g = weighted(&ept::random_tree(n, rng.next_u64()).map_err(er)?, 1000, rng.next_u64());
        aug_instance_checks(&g).map_err(|m| format!("weighted n={n}: {m}"))?;
    }
    // The envelope argument needs no positivity: wrapping the lighter child
    // stays within 3/2 even when weights vanish.
    let zeros = tree(P4)
        .with_vertex_weights(vec![Weight::ZERO, Weight::ONE, Weight::ZERO, Weight::new(3)])
        .map_err(er)?;
    aug_instance_checks(&zeros)?;
    Ok(())
}

// ---------------------------------------------------------------- criterion 7

fn split_instance_checks(g: &InputTree) -> Result<(), String> {
    let t = build_balanced_fast(g);
    let breakdown = ept_sum_edges(g, &t).map_err(er)?;
    let total = breakdown.total.get() as u128;
    let EptNode::Internal { edge: root, .. } = *t.node(t.root()) else {
        return Ok(());
    };
    for (&e, &charge) in &breakdown.per_internal_node {
        let (a, b) = split(g, &t, e).map_err(er)?;

        // The parts carry exactly the two components of g - e.
        let u_side = component_of(g, e, e.u());
        let mut got: Vec<u32> = a.vertices.iter().map(|v| v.0).collect();
        got.sort_unstable();
        ensure(got == u_side, format!("split at {e}: wrong u-side members"))?;
        ensure(
            a.vertices.len() + b.vertices.len() == g.n(),
            format!("split at {e}: parts do not partition"),
        )?;
        for part in [&a, &b] {
            validate_ept(&part.tree, &part.ept).map_err(er)?;
            for (new, old) in part.vertices.iter().enumerate() {
                ensure(
                    part.tree.vertex_weight(VertexId(new as u32)) == g.vertex_weight(*old),
                    "split relabeling changed a weight",
                )?;
            }
        }

        let ca = ept_sum_edges(&a.tree, &a.ept).map_err(er)?.total.get() as u128;
        let cb = ept_sum_edges(&b.tree, &b.ept).map_err(er)?.total.get() as u128;
        ensure(
            ca + cb + charge.get() as u128 <= total,
            format!("split at {e}: {ca}+{cb}+{charge} exceeds {total}"),
        )?;
        if e == root {
            ensure(
                ca + cb + charge.get() as u128 == total,
                "root split must account for the whole cost exactly",
            )?;
        }
    }
    Ok(())
}

/// Sorted members of the component of `start` in `g - e`, from scratch.
fn component_of(g: &InputTree, e: EdgeRef, start: VertexId) -> Vec<u32> {
    let mut adj = vec![Vec::new(); g.n()];
    for &f in g.edges() {
        if f != e {
            adj[f.u().index()].push(f.v().0);
            adj[f.v().index()].push(f.u().0);
        }
    }
    let mut seen = vec![false; g.n()];
    let mut stack = vec![start.0];
    seen[start.index()] = true;
    let mut out = vec![start.0];
    while let Some(v) = stack.pop() {
        for &w in &adj[v as usize] {
            if !seen[w as usize] {
                seen[w as usize] = true;
                out.push(w);
                stack.push(w);
            }
        }
    }
    out.sort_unstable();
    out
}

fn c07_splitting() -> Result<(), String> {
    // Frozen: splitting the path on four vertices at its root (1,2) leaves
    // two single-edge parts of cost 2 each, and the root charge 4 closes the
    // gap to the full cost 8 exactly.
    let p4 = tree(P4);
    let t = build_balanced_fast(&p4);
    let (a, b) = split(&p4, &t, EdgeRef::of(1, 2)).map_err(er)?;
    ensure(
        a.vertices == [VertexId(0), VertexId(1)] && b.vertices == [VertexId(2), VertexId(3)],
        "P4 split members drifted",
    )?;
    ensure(
        ept_sum_edges(&a.tree, &a.ept).map_err(er)?.total == Weight::new(2)
            && ept_sum_edges(&b.tree, &b.ept).map_err(er)?.total == Weight::new(2),
        "P4 split costs drifted",
    )?;
    ensure(
        matches!(split(&p4, &t, EdgeRef::of(0, 3)), Err(TreeError::NotAnEdge(_))),
        "split at a non-edge accepted",
    )?;

    for n in 2..=6 {
        for (i, g) in enumerate_labeled_trees(n).map_err(er)?.enumerate() {
            split_instance_checks(&g).map_err(|m| format!("unit n={n}: {m}"))?;
            let w = weighted(&g, 30, (n as u64) << 40 | i as u64);
            split_instance_checks(&w).map_err(|m| format!("weighted n={n}: {m}"))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 8

fn c08_complexity() -> Result<(), String> {
    // Stars make the contrast sharpest: the naive recursion peels one leaf
    // per step (quadratic), the fast construction emits one caterpillar
    // chain (quasi-linear). Thresholds leave wide margins around measured
    // slopes of about 2.06 and 1.00.
    let small = run_bench(&BenchConfig {
        shape: BenchShape::Star,
        sizes: vec![2048, 4096, 8192],
        reps: 2,
        seed: 0,
    })
    .map_err(er)?;
    let naive = small.naive_slope.ok_or("naive timings missing below the cap")?;
    let fast = small.fast_slope;
    ensure(
        naive >= 1.8,
        format!("naive slope {naive:.3} not clearly quadratic"),
    )?;
    ensure(fast <= 1.4, format!("fast slope {fast:.3} not quasi-linear"))?;
    ensure(
        naive - fast >= 0.5,
        format!("slopes {naive:.3} vs {fast:.3} not separated"),
    )?;
    let last = small.records.last().ok_or("no bench records")?;
    let naive_ns = last.naive_ns.ok_or("no naive timing at the top size")?;
    ensure(
        naive_ns >= 20 * last.fast_ns,
        format!("naive only {naive_ns}ns vs fast {}ns at n=8192", last.fast_ns),
    )?;

    // Above the naive cap only the fast construction runs, comfortably
    // handling a million vertices.
    let big = run_bench(&BenchConfig {
        shape: BenchShape::Star,
        sizes: vec![262_144, 1_048_576],
        reps: 1,
        seed: 0,
    })
    .map_err(er)?;
    ensure(
        big.records.iter().all(|r| r.naive_ns.is_none()) && big.naive_slope.is_none(),
        "naive ran above its cap",
    )?;
    ensure(
        big.fast_slope <= 1.45,
        format!("fast slope {:.3} degraded at scale", big.fast_slope),
    )?;

    // Secondary check on paths, where splits stay balanced: the naive cost
    // is dominated by per-step restriction copying and still separates.
    let path = run_bench(&BenchConfig {
        shape: BenchShape::Path,
        sizes: vec![2048, 4096, 8192],
        reps: 2,
        seed: 0,
    })
    .map_err(er)?;
    let pn = path.naive_slope.ok_or("path naive timings missing")?;
    ensure(
        pn - path.fast_slope >= 0.3,
        format!("path slopes {pn:.3} vs {:.3} not separated", path.fast_slope),
    )?;
    let last = path.records.last().ok_or("no path records")?;
    ensure(
        last.naive_ns.ok_or("missing timing")? >= 5 * last.fast_ns,
        "path naive/fast ratio collapsed",
    )?;
    Ok(())
}

// ---------------------------------------------------------------- criterion 9

/// Brute force over every EPT of the instance: count them and take the exact
/// minimum cost. Built on nothing but the edge list, so it cross-checks the
/// oracle's dynamic program end to end.
fn enumerate_min(g: &InputTree, mask: u64) -> (u128, u64) {
    if mask.count_ones() == 1 {
        return (1, 0);
    }
    let w: u64 = (0..g.n() as u32)
        .filter(|v| mask & (1 << v) != 0)
        .map(|v| g.vertex_weight(VertexId(v)).get())
        .sum();
    let mut count = 0u128;
    let mut best = u64::MAX;
    for &e in g.edges() {
        let (u, v) = (e.u().0, e.v().0);
        if mask & (1 << u) == 0 || mask & (1 << v) == 0 {
            continue;
        }
        // Flood the u-side without crossing e.
        let mut side = 1u64 << u;
        let mut stack = vec![u];
        while let Some(a) = stack.pop() {
            for &f in g.edges() {
                if f == e {
                    continue;
                }
                let (x, y) = (f.u().0, f.v().0);
                for (p, q) in [(x, y), (y, x)] {
                    if p == a && mask & (1 << q) != 0 && side & (1 << q) == 0 {
                        side |= 1 << q;
                        stack.push(q);
                    }
                }
            }
        }
        if side & (1 << v) != 0 {
            continue; // e is not a cut edge of this subset (cannot happen in a tree)
        }
        let x = g.edge_weight(e).expect("edge exists").get();
        let (cu, bu) = enumerate_min(g, side);
        let (cv, bv) = enumerate_min(g, mask & !side);
        count += cu * cv;
        best = best.min(x * w + bu + bv);
    }
    (count, best)
}

fn c09_enumeration() -> Result<(), String> {
    let full = |g: &InputTree| (1u64 << g.n()) - 1;

    // Shape counts have closed forms: stars order their leaves ((n-1)!
    // EPTs), paths bracket their edges (Catalan numbers).
    for (text, want) in [
        (STAR4, 6u128),
        ("tree 6\nedge 0 1\nedge 0 2\nedge 0 3\nedge 0 4\nedge 0 5\n", 120),
        (P4, 5),
        ("tree 5\nedge 0 1\nedge 1 2\nedge 2 3\nedge 3 4\n", 14),
        ("tree 6\nedge 0 1\nedge 1 2\nedge 2 3\nedge 3 4\nedge 4 5\n", 42),
    ] {
        let g = tree(text);
        let (count, _) = enumerate_min(&g, full(&g));
        ensure(count == want, format!("{text:?}: {count} EPTs, expected {want}"))?;
    }

    for n in 2..=6 {
        for (i, g) in enumerate_labeled_trees(n).map_err(er)?.enumerate() {
            for g in [g.clone(), weighted(&g, 20, (n as u64) << 48 | i as u64)] {
                let (_, brute) = enumerate_min(&g, full(&g));
                let (opt, _) = optimal_ept_sum(&g).map_err(er)?;
                if opt.get() != brute {
                    return Err(format!(
                        "oracle {opt} vs brute force {brute} on:\n{}",
                        g.to_text()
                    ));
                }
            }
        }
    }
    // Edge weights flow through both sides identically.
    let g = tree(P3E);
    let (_, brute) = enumerate_min(&g, full(&g));
    ensure(
        optimal_ept_sum(&g).map_err(er)?.0.get() == brute && brute == 12,
        "edge-weighted brute force drifted",
    )?;
    Ok(())
}

// --------------------------------------------------------------- criterion 10

fn bound_holds(sweep: &RatioSweep) -> Result<(), String> {
    for r in &sweep.records {
        if 2 * (r.balanced as u128) > 3 * (r.optimal as u128) {
            return Err(format!(
                "instance {} breaks the bound: {} vs {}",
                r.instance_id, r.balanced, r.optimal
            ));
        }
    }
    Ok(())
}

fn c10_ratio() -> Result<(), String> {
    // Exhaustive over all 18248 labeled trees through n=7, unit weights.
    // The worst ratio is exactly 21/20, first reached at tree index 465 of
    // n=7 (pinned; the sweep order is deterministic).
    let unit = run_ratio_exhaustive(&ExhaustiveRatioConfig {
        max_n: 7,
        weights: WeightMode::Unit,
        seed: 0,
        jobs: 1,
    })
    .map_err(er)?;
    bound_holds(&unit)?;
    let s = &unit.summary;
    ensure(
        s.count == 18248
            && (s.max_ratio_num, s.max_ratio_den) == (21, 20)
            && s.argmax_instance == "n7-i465",
        format!(
            "unit sweep drifted: {}/{} at {} over {}",
            s.max_ratio_num, s.max_ratio_den, s.argmax_instance, s.count
        ),
    )?;

    // Identical bytes regardless of worker count.
    let unit2 = run_ratio_exhaustive(&ExhaustiveRatioConfig {
        max_n: 7,
        weights: WeightMode::Unit,
        seed: 0,
        jobs: 2,
    })
    .map_err(er)?;
    ensure(
        ratio_records_csv(&unit.records) == ratio_records_csv(&unit2.records),
        "records depend on the job count",
    )?;

    // Weighted sweeps, frozen from pinned seeds.
    let wexh = run_ratio_exhaustive(&ExhaustiveRatioConfig {
        max_n: 6,
        weights: WeightMode::Uniform { lo: 1, hi: 10 },
        seed: 42,
        jobs: 1,
    })
    .map_err(er)?;
    bound_holds(&wexh)?;
    let s = &wexh.summary;
    ensure(
        (s.max_ratio_num, s.max_ratio_den) == (51, 46) && s.argmax_instance == "n6-i552",
        format!("weighted exhaustive drifted: {}/{} at {}", s.max_ratio_num, s.max_ratio_den, s.argmax_instance),
    )?;

    for (n, trials, hi, seed, num, den, argmax) in [
        (12, 300, 100, 9, 1778u64, 1693u64, "n12-t197"),
        (16, 40, 1000, 5, 27008, 25901, "n16-t3"),
    ] {
        let sweep = run_ratio_random(&RandomRatioConfig {
            n,
            trials,
            weights: WeightMode::Uniform { lo: 1, hi },
            seed,
            oracle_cap: 20,
            jobs: 0,
        })
        .map_err(er)?;
        bound_holds(&sweep)?;
        let s = &sweep.summary;
        ensure(
            (s.max_ratio_num, s.max_ratio_den) == (num, den) && s.argmax_instance == argmax,
            format!(
                "random n={n} drifted: {}/{} at {}, expected {num}/{den} at {argmax}",
                s.max_ratio_num, s.max_ratio_den, s.argmax_instance
            ),
        )?;
    }
    Ok(())
}
