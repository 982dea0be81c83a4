//! Command-line front end for the `ept` crate.
//!
//! Machine-readable results go to stdout as `key=value` lines; prose and
//! error reports go to stderr. Exit codes: 0 success, 1 bad usage or invalid
//! input, 2 oracle cap exceeded, 3 I/O failure, 4 a checked property was
//! falsified.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ept::{
    audit_records_csv, bench_records_csv, bench_summary_json, build_balanced_fast,
    build_balanced_naive, ept_sum_edges, ept_sum_leaves, optimal_ept_sum_with_cap,
    ratio_records_csv, ratio_summary_json, run_audits, run_bench, run_ratio_exhaustive,
    run_ratio_random, validate_ept, AuditCheck, AuditConfig, BenchConfig, BenchShape, Ept,
    EptViolation, ExhaustiveRatioConfig, HarnessError, InputTree, JsonError, OracleError,
    RandomRatioConfig, RatioSweep, TreeError, WeightMode, DEFAULT_ORACLE_CAP,
};

#[derive(Parser)]
#[command(name = "ept-cli", version, about = "Edge partition trees of weighted trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the balanced EPT of a tree file.
    Build(BuildArgs),
    /// Evaluate an EPT's cost under both definitions and validate it.
    Eval(EvalArgs),
    /// Check a tree file, and optionally an EPT against it.
    Validate(ValidateArgs),
    /// Compute the exact optimal cost (exponential; capped).
    Exact(ExactArgs),
    /// Measured sweeps and property audits.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Time the naive and fast builders across sizes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Tree file to read.
    #[arg(long)]
    input: PathBuf,
    /// fast, naive, or both (both also verifies the outputs agree).
    #[arg(long, default_value = "fast", value_parser = parse_algo)]
    algo: Algo,
    /// Write the EPT as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Algo {
    Fast,
    Naive,
    Both,
}

fn parse_algo(s: &str) -> Result<Algo, String> {
    match s {
        "fast" => Ok(Algo::Fast),
        "naive" => Ok(Algo::Naive),
        "both" => Ok(Algo::Both),
        other => Err(format!("unknown algorithm `{other}`; use fast, naive, or both")),
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Tree file to read.
    #[arg(long)]
    input: PathBuf,
    /// EPT JSON to evaluate; defaults to the balanced EPT of the input.
    #[arg(long)]
    ept: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Tree file to read.
    #[arg(long)]
    input: PathBuf,
    /// EPT JSON to validate against the tree.
    #[arg(long)]
    ept: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    /// Tree file to read.
    #[arg(long)]
    input: PathBuf,
    /// Vertex-count cap on the exponential search (hard limit 64).
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    cap: usize,
    /// Write an optimal EPT as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Experiment {
    /// Balanced-over-optimal cost ratios.
    Ratio(RatioArgs),
    /// Per-instance property checks.
    Audit(AuditArgs),
}

#[derive(Args)]
struct RatioArgs {
    /// Sweep every labeled tree on 2..=max-n vertices instead of sampling.
    #[arg(long)]
    exhaustive: bool,
    /// Largest size for --exhaustive (at most 9).
    #[arg(long)]
    max_n: Option<usize>,
    /// Vertex count for random sampling.
    #[arg(long)]
    n: Option<usize>,
    /// Number of random instances.
    #[arg(long)]
    trials: Option<u64>,
    /// unit, uniform:LO:HI, or zero-stress:HI.
    #[arg(long, default_value = "unit", value_parser = parse_weights)]
    weights: WeightMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oracle cap for random sweeps.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    cap: usize,
    /// Worker threads (0 = all cores). Output bytes never depend on this.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write records.csv and summary.json into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    trials: u64,
    /// unit, uniform:LO:HI, or zero-stress:HI.
    #[arg(long, default_value = "unit", value_parser = parse_weights)]
    weights: WeightMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated checks: fast-naive, validate, defs-agree,
    /// correctly-placed, aug-bound, split-lemma, ratio-bound. The default
    /// runs all but ratio-bound, which needs the oracle and so small n.
    #[arg(long, value_parser = parse_checks)]
    checks: Option<std::vec::Vec<AuditCheck>>,
    /// Oracle cap for the ratio-bound check.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    cap: usize,
    /// Worker threads (0 = all cores). Output bytes never depend on this.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write records.csv into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// path, star, or random.
    #[arg(long, default_value = "path", value_parser = parse_shape)]
    shape: BenchShape,
    /// Comma-separated sizes, e.g. 1024,4096,16384.
    #[arg(long, value_parser = parse_sizes)]
    sizes: std::vec::Vec<usize>,
    /// Timing repetitions per size; the minimum is kept.
    #[arg(long, default_value_t = 3)]
    reps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write records.csv and summary.json into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_weights(s: &str) -> Result<WeightMode, String> {
    if s == "unit" {
        return Ok(WeightMode::Unit);
    }
    if let Some(rest) = s.strip_prefix("uniform:") {
        let (lo, hi) = rest
            .split_once(':')
            .ok_or_else(|| "uniform weights need uniform:LO:HI".to_string())?;
        let lo: u64 = lo.parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
        let hi: u64 = hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
        return Ok(WeightMode::Uniform { lo, hi });
    }
    if let Some(hi) = s.strip_prefix("zero-stress:") {
        let hi: u64 = hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
        return Ok(WeightMode::ZeroStress { hi });
    }
    Err(format!(
        "unknown weight mode `{s}`; use unit, uniform:LO:HI, or zero-stress:HI"
    ))
}

fn parse_checks(s: &str) -> Result<Vec<AuditCheck>, String> {
    s.split(',')
        .map(|name| {
            AuditCheck::from_name(name.trim())
                .ok_or_else(|| format!("unknown check `{}`", name.trim()))
        })
        .collect()
}

fn parse_shape(s: &str) -> Result<BenchShape, String> {
    BenchShape::from_name(s).ok_or_else(|| format!("unknown shape `{s}`; use path, star, or random"))
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|tok| tok.trim().parse::<usize>().map_err(|_| format!("bad size `{tok}`")))
        .collect()
}

enum AppError {
    Usage(String),
    Input(String),
    Cap(String),
    Io(String),
    Violation(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Usage(_) | AppError::Input(_) => 1,
            AppError::Cap(_) => 2,
            AppError::Io(_) => 3,
            AppError::Violation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Usage(m)
            | AppError::Input(m)
            | AppError::Cap(m)
            | AppError::Io(m)
            | AppError::Violation(m) => m,
        }
    }
}

impl From<TreeError> for AppError {
    fn from(e: TreeError) -> AppError {
        AppError::Input(e.to_string())
    }
}

impl From<JsonError> for AppError {
    fn from(e: JsonError) -> AppError {
        AppError::Input(e.to_string())
    }
}

impl From<EptViolation> for AppError {
    fn from(e: EptViolation) -> AppError {
        AppError::Input(e.to_string())
    }
}

impl From<OracleError> for AppError {
    fn from(e: OracleError) -> AppError {
        match e {
            OracleError::CapExceeded { .. } => AppError::Cap(e.to_string()),
            _ => AppError::Input(e.to_string()),
        }
    }
}

impl From<HarnessError> for AppError {
    fn from(e: HarnessError) -> AppError {
        match e {
            HarnessError::Violation {
                ref check,
                ref instance_id,
                ref detail,
                ref tree_text,
            } => AppError::Violation(format!(
                "{check} falsified on instance {instance_id}: {detail}\noffending tree:\n{tree_text}"
            )),
            HarnessError::Oracle(OracleError::CapExceeded { .. }) => AppError::Cap(e.to_string()),
            HarnessError::Config(_) => AppError::Usage(e.to_string()),
            _ => AppError::Input(e.to_string()),
        }
    }
}

fn read_tree(path: &Path) -> Result<InputTree, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    Ok(InputTree::parse(&text)?)
}

fn read_ept(path: &Path) -> Result<Ept, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    Ok(Ept::from_json(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), AppError> {
    std::fs::write(path, contents).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Build(args) => cmd_build(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Experiment(Experiment::Ratio(args)) => cmd_ratio(args),
        Command::Experiment(Experiment::Audit(args)) => cmd_audit(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_build(args: BuildArgs) -> Result<(), AppError> {
    let g = read_tree(&args.input)?;
    let (label, t) = match args.algo {
        Algo::Fast => ("fast", build_balanced_fast(&g)),
        Algo::Naive => ("naive", build_balanced_naive(&g)),
        Algo::Both => {
            let fast = build_balanced_fast(&g);
            let naive = build_balanced_naive(&g);
            if fast.to_json() != naive.to_json() {
                return Err(AppError::Violation(
                    "fast and naive builders disagree on this input".to_string(),
                ));
            }
            ("both", fast)
        }
    };
    let cost = ept_sum_edges(&g, &t)?;
    println!("algo={label}");
    println!("n={}", g.n());
    println!("cost={}", cost.total);
    if let Some(out) = args.out {
        write_file(&out, &t.to_json())?;
        println!("out={}", out.display());
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), AppError> {
    let g = read_tree(&args.input)?;
    let t = match args.ept {
        Some(path) => read_ept(&path)?,
        None => build_balanced_fast(&g),
    };
    let def1 = ept_sum_edges(&g, &t)?.total;
    let def2 = ept_sum_leaves(&g, &t)?;
    println!("def1={def1}");
    println!("def2={def2}");
    match validate_ept(&g, &t) {
        Ok(()) => {
            println!("valid=true");
            Ok(())
        }
        Err(v) => {
            println!("valid=false");
            Err(AppError::Input(v.to_string()))
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), AppError> {
    let g = read_tree(&args.input)?;
    println!("n={}", g.n());
    println!("total_weight={}", g.total_weight());
    if let Some(path) = args.ept {
        let t = read_ept(&path)?;
        match validate_ept(&g, &t) {
            Ok(()) => println!("ept_valid=true"),
            Err(v) => {
                println!("ept_valid=false");
                return Err(AppError::Input(v.to_string()));
            }
        }
    }
    println!("ok=true");
    Ok(())
}

fn cmd_exact(args: ExactArgs) -> Result<(), AppError> {
    let g = read_tree(&args.input)?;
    let (cost, t) = optimal_ept_sum_with_cap(&g, args.cap)?;
    println!("n={}", g.n());
    println!("cost={cost}");
    if let Some(out) = args.out {
        write_file(&out, &t.to_json())?;
        println!("out={}", out.display());
    }
    Ok(())
}

fn sweep_output(sweep: &RatioSweep, out_dir: Option<&Path>) -> Result<(), AppError> {
    let s = &sweep.summary;
    println!("instances={}", s.count);
    println!("max_ratio_num={}", s.max_ratio_num);
    println!("max_ratio_den={}", s.max_ratio_den);
    println!(
        "max_ratio={:.6}",
        s.max_ratio_num as f64 / s.max_ratio_den as f64
    );
    println!("argmax={}", s.argmax_instance);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| AppError::Io(format!("{}: {e}", dir.display())))?;
        let records = dir.join("records.csv");
        write_file(&records, &ratio_records_csv(&sweep.records))?;
        let summary = dir.join("summary.json");
        write_file(&summary, &ratio_summary_json(s))?;
        println!("records_csv={}", records.display());
        println!("summary_json={}", summary.display());
    }
    Ok(())
}

fn cmd_ratio(args: RatioArgs) -> Result<(), AppError> {
    let sweep = if args.exhaustive {
        let max_n = args.max_n.ok_or_else(|| {
            AppError::Usage("--exhaustive needs --max-n".to_string())
        })?;
        if args.n.is_some() || args.trials.is_some() {
            return Err(AppError::Usage(
                "--n/--trials do not apply to --exhaustive".to_string(),
            ));
        }
        run_ratio_exhaustive(&ExhaustiveRatioConfig {
            max_n,
            weights: args.weights,
            seed: args.seed,
            jobs: args.jobs,
        })?
    } else {
        let n = args
            .n
            .ok_or_else(|| AppError::Usage("random sweeps need --n".to_string()))?;
        let trials = args
            .trials
            .ok_or_else(|| AppError::Usage("random sweeps need --trials".to_string()))?;
        if args.max_n.is_some() {
            return Err(AppError::Usage("--max-n needs --exhaustive".to_string()));
        }
        run_ratio_random(&RandomRatioConfig {
            n,
            trials,
            weights: args.weights,
            seed: args.seed,
            oracle_cap: args.cap,
            jobs: args.jobs,
        })?
    };
    sweep_output(&sweep, args.out_dir.as_deref())
}

fn cmd_audit(args: AuditArgs) -> Result<(), AppError> {
    let checks = args.checks.unwrap_or_else(|| {
        AuditCheck::ALL
            .into_iter()
            .filter(|c| *c != AuditCheck::RatioBound)
            .collect()
    });
    let records = run_audits(&AuditConfig {
        n: args.n,
        trials: args.trials,
        weights: args.weights,
        seed: args.seed,
        checks: checks.clone(),
        oracle_cap: args.cap,
        jobs: args.jobs,
    })?;
    println!("instances={}", records.len());
    println!(
        "checks={}",
        checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")
    );
    if let Some(dir) = args.out_dir {
        std::fs::create_dir_all(&dir)
            .map_err(|e| AppError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join("records.csv");
        write_file(&path, &audit_records_csv(&records))?;
        println!("records_csv={}", path.display());
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), AppError> {
    let outcome = run_bench(&BenchConfig {
        shape: args.shape,
        sizes: args.sizes,
        reps: args.reps,
        seed: args.seed,
    })?;
    println!("records={}", outcome.records.len());
    match outcome.naive_slope {
        Some(s) => println!("naive_slope={s:.3}"),
        None => println!("naive_slope=none"),
    }
    println!("fast_slope={:.3}", outcome.fast_slope);
    if let Some(dir) = args.out_dir {
        std::fs::create_dir_all(&dir)
            .map_err(|e| AppError::Io(format!("{}: {e}", dir.display())))?;
        let records = dir.join("records.csv");
        write_file(&records, &bench_records_csv(&outcome.records))?;
        let summary = dir.join("summary.json");
        write_file(&summary, &bench_summary_json(&outcome))?;
        println!("records_csv={}", records.display());
        println!("summary_json={}", summary.display());
    }
    Ok(())
}
