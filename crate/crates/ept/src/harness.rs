//! Experiment runners: ratio sweeps against the exact oracle, property
//! audits, and naive-vs-fast benchmarks.
//!
//! Every run is deterministic in its configuration: instance seeds are drawn
//! serially up front, instances are then processed in parallel, and results
//! are collected back in instance order — so the thread count never changes
//! a byte of output. A falsified property is a first-class result: the run
//! stops and reports the offending instance in full.

use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

use crate::aug::{aug_sum, augment};
use crate::builder::{build_balanced_fast, build_balanced_naive};
use crate::ept::{correctly_placed_all, ept_sum_edges, ept_sum_leaves, split, validate_ept, Ept};
use crate::error::HarnessError;
use crate::oracle::{
    labeled_tree_count, optimal_ept_sum_with_cap, prufer_decode, prufer_from_index, random_tree,
    random_weights, SplitMix64, DEFAULT_ORACLE_CAP,
};
use crate::tree::InputTree;
use crate::weight::Weight;

/// How experiment instances get their vertex weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// Leave every weight at 1.
    Unit,
    /// Uniform in `lo..=hi`, `lo >= 1`.
    Uniform { lo: u64, hi: u64 },
    /// Each weight is 0 with probability 1/4, else uniform in `1..=hi`;
    /// redrawn until the total is positive. Zero weights void the
    /// approximation guarantee, which makes this mode the honest stress
    /// test: audits that check the bound under it can and do fail.
    ZeroStress { hi: u64 },
}

impl WeightMode {
    fn validate(&self) -> Result<(), HarnessError> {
        match *self {
            WeightMode::Unit => Ok(()),
            WeightMode::Uniform { lo, hi } => {
                if lo == 0 || lo > hi {
                    return Err(HarnessError::Config(format!(
                        "uniform weights need 1 <= lo <= hi, got [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
            WeightMode::ZeroStress { hi } => {
                if hi == 0 {
                    return Err(HarnessError::Config(
                        "zero-stress weights need hi >= 1".to_string(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn apply(&self, g: &InputTree, seed: u64) -> Result<InputTree, HarnessError> {
        match *self {
            WeightMode::Unit => Ok(g.clone()),
            WeightMode::Uniform { lo, hi } => Ok(random_weights(g, lo, hi, seed)?),
            WeightMode::ZeroStress { hi } => {
                let mut rng = SplitMix64::new(seed);
                loop {
                    let weights: Vec<Weight> = (0..g.n())
                        .map(|_| {
                            if rng.next_below(4) == 0 {
                                Weight::ZERO
                            } else {
                                Weight::new(1 + rng.next_below(hi))
                            }
                        })
                        .collect();
                    if weights.iter().any(|w| !w.is_zero()) {
                        return Ok(g.with_vertex_weights(weights)?);
                    }
                }
            }
        }
    }
}

/// One instance measured against the oracle.
#[derive(Clone, Debug, Serialize)]
pub struct RatioRecord {
    pub instance_id: String,
    pub n: usize,
    pub tree_seed: u64,
    pub weight_seed: u64,
    pub balanced: u64,
    pub optimal: u64,
}

/// Worst ratio seen over a sweep, kept exact as a fraction.
#[derive(Clone, Debug, Serialize)]
pub struct RatioSummary {
    pub count: u64,
    pub max_ratio_num: u64,
    pub max_ratio_den: u64,
    pub argmax_instance: String,
}

#[derive(Clone, Debug)]
pub struct RatioSweep {
    pub records: Vec<RatioRecord>,
    pub summary: RatioSummary,
}

/// `a/b > c/d` for positive denominators, exactly.
fn ratio_gt(a: u64, b: u64, c: u64, d: u64) -> bool {
    (a as u128) * (d as u128) > (c as u128) * (b as u128)
}

fn summarize(records: &[RatioRecord]) -> Result<RatioSummary, HarnessError> {
    let mut best: Option<&RatioRecord> = None;
    for rec in records {
        if rec.optimal == 0 {
            return Err(HarnessError::Config(format!(
                "instance {} has zero optimal cost; ratios are undefined",
                rec.instance_id
            )));
        }
        let better = match best {
            None => true,
            Some(b) => ratio_gt(rec.balanced, rec.optimal, b.balanced, b.optimal),
        };
        if better {
            best = Some(rec);
        }
    }
    let best = best.ok_or_else(|| HarnessError::Config("empty sweep".to_string()))?;
    Ok(RatioSummary {
        count: records.len() as u64,
        max_ratio_num: best.balanced,
        max_ratio_den: best.optimal,
        argmax_instance: best.instance_id.clone(),
    })
}

fn ratio_record(
    instance_id: String,
    g: &InputTree,
    tree_seed: u64,
    weight_seed: u64,
    cap: usize,
) -> Result<RatioRecord, HarnessError> {
    let balanced = ept_sum_edges(g, &build_balanced_fast(g))?.total.get();
    let (optimal, _) = optimal_ept_sum_with_cap(g, cap)?;
    Ok(RatioRecord {
        instance_id,
        n: g.n(),
        tree_seed,
        weight_seed,
        balanced,
        optimal: optimal.get(),
    })
}

fn run_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs) // 0 means rayon's default
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(work))
}

/// First error by instance order, else the records. Collecting everything
/// before scanning keeps failure reports independent of thread timing.
fn ordered<T>(results: Vec<Result<T, HarnessError>>) -> Result<Vec<T>, HarnessError> {
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r?);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ExhaustiveRatioConfig {
    /// Sweeps every labeled tree on 2..=max_n vertices.
    pub max_n: usize,
    pub weights: WeightMode,
    /// Base seed for weight draws; irrelevant under unit weights.
    pub seed: u64,
    /// Worker threads; 0 picks the rayon default. Never affects output.
    pub jobs: usize,
}

pub fn run_ratio_exhaustive(cfg: &ExhaustiveRatioConfig) -> Result<RatioSweep, HarnessError> {
    if !(2..=9).contains(&cfg.max_n) {
        return Err(HarnessError::Config(format!(
            "exhaustive sweeps cover 2 <= max_n <= 9, got {}",
            cfg.max_n
        )));
    }
    cfg.weights.validate()?;
    let mut records = Vec::new();
    for n in 2..=cfg.max_n {
        let count = labeled_tree_count(n);
        // Weight seeds must not depend on job count: derive from the index.
        let base = SplitMix64::new(cfg.seed ^ n as u64).next_u64();
        let chunk = run_pool(cfg.jobs, || {
            (0..count)
                .into_par_iter()
                .map(|index| {
                    let g = prufer_decode(&prufer_from_index(n, index), n)
                        .expect("enumerated trees are valid");
                    let g = cfg.weights.apply(&g, base ^ index)?;
                    ratio_record(
                        format!("n{n}-i{index}"),
                        &g,
                        index,
                        base ^ index,
                        DEFAULT_ORACLE_CAP,
                    )
                })
                .collect::<Vec<_>>()
        })?;
        records.extend(ordered(chunk)?);
    }
    let summary = summarize(&records)?;
    Ok(RatioSweep { records, summary })
}

#[derive(Clone, Debug)]
pub struct RandomRatioConfig {
    pub n: usize,
    pub trials: u64,
    pub weights: WeightMode,
    pub seed: u64,
    pub oracle_cap: usize,
    pub jobs: usize,
}

pub fn run_ratio_random(cfg: &RandomRatioConfig) -> Result<RatioSweep, HarnessError> {
    if cfg.n < 2 {
        return Err(HarnessError::Config(format!(
            "ratio instances need n >= 2, got {}",
            cfg.n
        )));
    }
    if cfg.trials == 0 {
        return Err(HarnessError::Config("trials must be at least 1".to_string()));
    }
    cfg.weights.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let seeds: Vec<(u64, u64)> = (0..cfg.trials)
        .map(|_| (rng.next_u64(), rng.next_u64()))
        .collect();
    let results = run_pool(cfg.jobs, || {
        seeds
            .par_iter()
            .enumerate()
            .map(|(t, &(tree_seed, weight_seed))| {
                let g = random_tree(cfg.n, tree_seed)?;
                let g = cfg.weights.apply(&g, weight_seed)?;
                ratio_record(
                    format!("n{}-t{t}", cfg.n),
                    &g,
                    tree_seed,
                    weight_seed,
                    cfg.oracle_cap,
                )
            })
            .collect::<Vec<_>>()
    })?;
    let records = ordered(results)?;
    let summary = summarize(&records)?;
    Ok(RatioSweep { records, summary })
}

/// Properties an audit can assert per instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditCheck {
    /// Fast and naive builders emit byte-identical trees.
    FastNaive,
    /// The built tree satisfies every EPT invariant.
    Validate,
    /// Node-sum and leaf-sum cost definitions agree.
    DefsAgree,
    /// Every internal node's edge is most balanced for its leaf set.
    CorrectlyPlaced,
    /// Twice the augmented cost is at most three times the plain cost.
    AugBound,
    /// Splitting at any internal node's edge yields two valid EPTs whose
    /// costs fit under the original minus that node's own charge.
    SplitLemma,
    /// Twice the balanced cost is at most three times the optimal cost.
    /// Needs the oracle, and genuinely fails on some zero-weight instances.
    RatioBound,
}

impl AuditCheck {
    pub const ALL: [AuditCheck; 7] = [
        AuditCheck::FastNaive,
        AuditCheck::Validate,
        AuditCheck::DefsAgree,
        AuditCheck::CorrectlyPlaced,
        AuditCheck::AugBound,
        AuditCheck::SplitLemma,
        AuditCheck::RatioBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AuditCheck::FastNaive => "fast-naive",
            AuditCheck::Validate => "validate",
            AuditCheck::DefsAgree => "defs-agree",
            AuditCheck::CorrectlyPlaced => "correctly-placed",
            AuditCheck::AugBound => "aug-bound",
            AuditCheck::SplitLemma => "split-lemma",
            AuditCheck::RatioBound => "ratio-bound",
        }
    }

    pub fn from_name(name: &str) -> Option<AuditCheck> {
        AuditCheck::ALL.iter().copied().find(|c| c.name() == name)
    }
}

#[derive(Clone, Debug)]
pub struct AuditConfig {
    pub n: usize,
    pub trials: u64,
    pub weights: WeightMode,
    pub seed: u64,
    pub checks: Vec<AuditCheck>,
    pub oracle_cap: usize,
    pub jobs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditRecord {
    pub instance_id: String,
    pub n: usize,
    pub tree_seed: u64,
    pub weight_seed: u64,
    pub balanced: u64,
    pub checks: String,
}

pub fn run_audits(cfg: &AuditConfig) -> Result<Vec<AuditRecord>, HarnessError> {
    if cfg.n < 2 {
        return Err(HarnessError::Config(format!(
            "audit instances need n >= 2, got {}",
            cfg.n
        )));
    }
    if cfg.trials == 0 {
        return Err(HarnessError::Config("trials must be at least 1".to_string()));
    }
    if cfg.checks.is_empty() {
        return Err(HarnessError::Config("no checks selected".to_string()));
    }
    cfg.weights.validate()?;
    let checks_label = cfg
        .checks
        .iter()
        .map(|c| c.name())
        .collect::<Vec<_>>()
        .join(";");
    let mut rng = SplitMix64::new(cfg.seed);
    let seeds: Vec<(u64, u64)> = (0..cfg.trials)
        .map(|_| (rng.next_u64(), rng.next_u64()))
        .collect();
    let results = run_pool(cfg.jobs, || {
        seeds
            .par_iter()
            .enumerate()
            .map(|(t, &(tree_seed, weight_seed))| {
                let instance_id = format!("n{}-t{t}", cfg.n);
                let g = random_tree(cfg.n, tree_seed)?;
                let g = cfg.weights.apply(&g, weight_seed)?;
                let balanced = audit_instance(&instance_id, &g, cfg)?;
                Ok(AuditRecord {
                    instance_id,
                    n: cfg.n,
                    tree_seed,
                    weight_seed,
                    balanced,
                    checks: checks_label.clone(),
                })
            })
            .collect::<Vec<_>>()
    })?;
    ordered(results)
}

fn audit_instance(instance_id: &str, g: &InputTree, cfg: &AuditConfig) -> Result<u64, HarnessError> {
    let violation = |check: AuditCheck, detail: String| HarnessError::Violation {
        check: check.name().to_string(),
        instance_id: instance_id.to_string(),
        detail,
        tree_text: g.to_text(),
    };
    let t = build_balanced_fast(g);
    let cost = ept_sum_edges(g, &t)?;
    for &check in &cfg.checks {
        match check {
            AuditCheck::FastNaive => {
                let naive = build_balanced_naive(g);
                if naive.to_json() != t.to_json() {
                    return Err(violation(
                        check,
                        "fast and naive builders disagree".to_string(),
                    ));
                }
            }
            AuditCheck::Validate => {
                if let Err(v) = validate_ept(g, &t) {
                    return Err(violation(check, v.to_string()));
                }
            }
            AuditCheck::DefsAgree => {
                let leaves = ept_sum_leaves(g, &t)?;
                if leaves != cost.total {
                    return Err(violation(
                        check,
                        format!("node sum {} vs leaf sum {}", cost.total, leaves),
                    ));
                }
            }
            AuditCheck::CorrectlyPlaced => {
                if !correctly_placed_all(g, &t) {
                    return Err(violation(
                        check,
                        "a node's edge is not most balanced for its leaves".to_string(),
                    ));
                }
            }
            AuditCheck::AugBound => {
                let a = aug_sum(g, &augment(g, &t)?)?;
                if 2 * (a.get() as u128) > 3 * (cost.total.get() as u128) {
                    return Err(violation(
                        check,
                        format!("augmented {} vs plain {}", a, cost.total),
                    ));
                }
            }
            AuditCheck::SplitLemma => {
                audit_split(g, &t, cost.total, &violation)?;
            }
            AuditCheck::RatioBound => {
                let (opt, _) = optimal_ept_sum_with_cap(g, cfg.oracle_cap)?;
                if 2 * (cost.total.get() as u128) > 3 * (opt.get() as u128) {
                    return Err(violation(
                        check,
                        format!("balanced {} vs optimal {}", cost.total, opt),
                    ));
                }
            }
        }
    }
    Ok(cost.total.get())
}

fn audit_split(
    g: &InputTree,
    t: &Ept,
    total: Weight,
    violation: &impl Fn(AuditCheck, String) -> HarnessError,
) -> Result<(), HarnessError> {
    let check = AuditCheck::SplitLemma;
    let cost = ept_sum_edges(g, t)?;
    let full = crate::tree::Restriction::full(g);
    for (edge, charge) in &cost.per_internal_node {
        // A side of zero total weight cannot form a valid weighted tree, so
        // no split exists there; only zero-stress instances hit this.
        let sides = g.component_weights(&full, *edge)?;
        if sides.side_u_weight.is_zero() || sides.side_v_weight.is_zero() {
            continue;
        }
        let (a, b) = split(g, t, *edge)?;
        for part in [&a, &b] {
            if let Err(v) = validate_ept(&part.tree, &part.ept) {
                return Err(violation(check, format!("split at {edge}: {v}")));
            }
        }
        let ca = ept_sum_edges(&a.tree, &a.ept)?.total.get() as u128;
        let cb = ept_sum_edges(&b.tree, &b.ept)?.total.get() as u128;
        if ca + cb + charge.get() as u128 > total.get() as u128 {
            return Err(violation(
                check,
                format!(
                    "split at {edge}: parts cost {}+{} with charge {} against {}",
                    ca, cb, charge, total
                ),
            ));
        }
    }
    Ok(())
}

/// Tree shapes the benchmark can generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchShape {
    /// The quadratic worst case for the naive builder.
    Path,
    /// Maximum-degree centroid; one caterpillar chain.
    Star,
    /// Uniform labeled tree per size.
    Random,
}

impl BenchShape {
    pub fn name(self) -> &'static str {
        match self {
            BenchShape::Path => "path",
            BenchShape::Star => "star",
            BenchShape::Random => "random",
        }
    }

    pub fn from_name(name: &str) -> Option<BenchShape> {
        [BenchShape::Path, BenchShape::Star, BenchShape::Random]
            .into_iter()
            .find(|s| s.name() == name)
    }

    fn build(self, n: usize, seed: u64) -> Result<InputTree, HarnessError> {
        Ok(match self {
            BenchShape::Path => {
                let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (v - 1, v)).collect();
                InputTree::from_edges(n, &edges)?
            }
            BenchShape::Star => {
                let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (0, v)).collect();
                InputTree::from_edges(n, &edges)?
            }
            BenchShape::Random => random_tree(n, seed)?,
        })
    }
}

/// The naive builder is quadratic; sizes past this take too long to time.
pub const NAIVE_BENCH_CAP: usize = 1 << 14;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub shape: BenchShape,
    pub sizes: Vec<usize>,
    /// Timing repetitions per size; the minimum is kept.
    pub reps: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub shape: String,
    pub n: usize,
    /// Nanoseconds; absent when n is over the naive cap.
    pub naive_ns: Option<u64>,
    pub fast_ns: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchOutcome {
    pub records: Vec<BenchRecord>,
    /// Log-log slope of runtime against n; roughly the polynomial degree.
    pub naive_slope: Option<f64>,
    pub fast_slope: f64,
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutcome, HarnessError> {
    if cfg.sizes.len() < 2 {
        return Err(HarnessError::Config(
            "benchmarks need at least two sizes for a slope".to_string(),
        ));
    }
    if cfg.sizes.iter().any(|&n| n < 2) {
        return Err(HarnessError::Config("benchmark sizes start at 2".to_string()));
    }
    if cfg.reps == 0 {
        return Err(HarnessError::Config("reps must be at least 1".to_string()));
    }
    let mut records = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let g = cfg.shape.build(n, cfg.seed ^ n as u64)?;
        let fast_ns = time_min(cfg.reps, || build_balanced_fast(&g));
        let naive_ns = if n <= NAIVE_BENCH_CAP {
            Some(time_min(cfg.reps, || build_balanced_naive(&g)))
        } else {
            None
        };
        records.push(BenchRecord {
            shape: cfg.shape.name().to_string(),
            n,
            naive_ns,
            fast_ns,
        });
    }
    let fast_slope = slope(
        records
            .iter()
            .map(|r| (r.n as f64, r.fast_ns.max(1) as f64)),
    );
    let naive_points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.naive_ns.map(|t| (r.n as f64, t.max(1) as f64)))
        .collect();
    let naive_slope = if naive_points.len() >= 2 {
        Some(slope(naive_points.into_iter()))
    } else {
        None
    };
    Ok(BenchOutcome {
        records,
        naive_slope,
        fast_slope,
    })
}

fn time_min<T>(reps: u32, mut f: impl FnMut() -> T) -> u64 {
    let mut best = u64::MAX;
    for _ in 0..reps {
        let start = Instant::now();
        let out = f();
        let ns = start.elapsed().as_nanos() as u64;
        drop(out);
        best = best.min(ns.max(1));
    }
    best
}

/// Least-squares slope of ln(t) against ln(n).
fn slope(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points.map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn ratio_decimal(num: u64, den: u64) -> String {
    format!("{:.6}", num as f64 / den as f64)
}

pub fn ratio_summary_json(summary: &RatioSummary) -> String {
    serde_json::to_string(summary).expect("summary has no unserializable state")
}

pub fn bench_summary_json(outcome: &BenchOutcome) -> String {
    serde_json::to_string(outcome).expect("outcome has no unserializable state")
}

pub fn ratio_records_csv(records: &[RatioRecord]) -> String {
    let mut out = String::from("instance_id,n,tree_seed,weight_seed,balanced,optimal,ratio\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.instance_id,
            r.n,
            r.tree_seed,
            r.weight_seed,
            r.balanced,
            r.optimal,
            ratio_decimal(r.balanced, r.optimal)
        ));
    }
    out
}

pub fn audit_records_csv(records: &[AuditRecord]) -> String {
    let mut out = String::from("instance_id,n,tree_seed,weight_seed,balanced,checks\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.instance_id, r.n, r.tree_seed, r.weight_seed, r.balanced, r.checks
        ));
    }
    out
}

pub fn bench_records_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("shape,n,naive_ns,fast_ns\n");
    for r in records {
        let naive = r.naive_ns.map_or(String::new(), |t| t.to_string());
        out.push_str(&format!("{},{},{},{}\n", r.shape, r.n, naive, r.fast_ns));
    }
    out
}
