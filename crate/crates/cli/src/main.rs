//! `codiff`: batch driver for the experiment suites and one-shot estimators.
//!
//! Exit status is 0 when every report row passes, 1 when some row fails and
//! 2 on usage, input or numerical errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::json;

use codiff::codifferential::{build_hypodifferential, expansion_residual, BuildConfig, OffsetSetDoc};
use codiff::convex_geometry::exact_fan::exact_demyanov_difference;
use codiff::convex_geometry::{demyanov_difference, DirectionSampler, Polytope, PolytopeDoc};
use codiff::first_order::{direction_grid, estimate_df, DfConfig};
use codiff::function_models::{load_model, MaxMinQuadModel, Objective};
use codiff::harness::{run_suite, write_reports, ExperimentConfig, ReportRow, Suite};
use codiff::second_order::{second_hypodiff_algorithm, MatrixRoute, SecondConfig};

#[derive(Parser)]
#[command(name = "codiff", version, about = "Subdifferentials, Demyanov differences and codifferentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and print every report row.
    Run(SuiteArgs),
    /// Run a suite and print one PASS/FAIL line per criterion.
    Verify(SuiteArgs),
    /// Demyanov difference of two polytope files, or `lower ⇀ (−upper)` of a
    /// model at its anchor.
    DemyanovDiff(DiffArgs),
    /// Averaged-gradient subdifferential of a model.
    Subdiff(PointArgs),
    /// Continuous hypodifferential of a model.
    Codiff(PointArgs),
    /// Second-order hypodifferential of a model without hyper pieces.
    Second(PointArgs),
}

#[derive(Args)]
struct SuiteArgs {
    /// first-order, demyanov, codiff, second-order, sawtooth or all.
    #[arg(long, default_value = "all")]
    suite: Suite,
    /// Model file; without one the built-in battery runs.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, default_value_t = ExperimentConfig::default().seed)]
    seed: u64,
    /// Directory for report.csv, summary.json and continuity tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance override, e.g. `df=1e-4`; repeatable.
    #[arg(long = "tol", value_name = "KEY=VAL")]
    tol: Vec<String>,
    /// Budget override, e.g. `pairs=20`; repeatable.
    #[arg(long = "budget", value_name = "KEY=VAL")]
    budget: Vec<String>,
    /// Write 0 for runtimes so reports are reproducible bit for bit.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct DiffArgs {
    /// Polytope files `{"dim": n, "vertices": [...]}`.
    #[arg(num_args = 0..=2)]
    sets: Vec<PathBuf>,
    #[arg(long, conflicts_with = "sets")]
    problem: Option<PathBuf>,
    /// Use the exact normal-fan construction (dimension at most 2).
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = ExperimentConfig::default().seed)]
    seed: u64,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Comma-separated point; defaults to the model anchor.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    at: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(text) = std::env::var("CODIFF_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .with_context(|| format!("CODIFF_THREADS must be a nonnegative integer, got `{text}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn dispatch(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Run(args) => run(args, false),
        Command::Verify(args) => run(args, true),
        Command::DemyanovDiff(args) => demyanov(args).map(|_| true),
        Command::Subdiff(args) => subdiff(args).map(|_| true),
        Command::Codiff(args) => codiff_cmd(args).map(|_| true),
        Command::Second(args) => second(args).map(|_| true),
    }
}

fn experiment_config(args: SuiteArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        problem: args.problem,
        suite: args.suite,
        seed: args.seed,
        out: args.out,
        timing: !args.no_timing,
        ..ExperimentConfig::default()
    };
    for t in &args.tol {
        cfg.tolerances.apply(t)?;
    }
    for b in &args.budget {
        cfg.budgets.apply(b)?;
    }
    Ok(cfg)
}

fn run(args: SuiteArgs, summary_only: bool) -> anyhow::Result<bool> {
    let cfg = experiment_config(args)?;
    let report = run_suite(&cfg)?;
    for row in &report.rows {
        if summary_only && row.case_id.contains('.') {
            continue;
        }
        println!("{}", format_row(row, summary_only));
    }
    if let Some(dir) = &cfg.out {
        for path in write_reports(&report, dir)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(report.passed())
}

fn format_row(r: &ReportRow, summary_only: bool) -> String {
    let verdict = if r.pass { "PASS" } else { "FAIL" };
    if summary_only {
        return format!("{verdict} {:<4} {} failed check(s)", r.case_id, r.value);
    }
    let mut line = format!(
        "{verdict} {:<16} {:e} {} {:e}  {}",
        r.case_id, r.value, r.relation, r.tolerance, r.quantity
    );
    if !r.note.is_empty() {
        line.push_str(&format!("  [{}]", r.note));
    }
    line
}

fn read_polytope(path: &Path) -> anyhow::Result<Polytope> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: PolytopeDoc = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Polytope::try_from(doc).with_context(|| format!("in {}", path.display()))?)
}

fn demyanov(args: DiffArgs) -> anyhow::Result<()> {
    let (a, b) = match (&args.problem, args.sets.as_slice()) {
        (Some(p), []) => {
            let pair = load_model(p)?.anchor_quasidifferential()?;
            (pair.lower, pair.upper.negate())
        }
        (None, [a, b]) => (read_polytope(a)?, read_polytope(b)?),
        _ => bail!("give two polytope files or --problem"),
    };
    let diff = if args.exact {
        exact_demyanov_difference(&a, &b)?
    } else {
        demyanov_difference(&a, &b, &DirectionSampler::with_seed(args.seed))?
    };
    print_json(&json!({ "difference": PolytopeDoc::from(&diff) }))
}

fn model_and_point(args: &PointArgs) -> anyhow::Result<(MaxMinQuadModel, DVector<f64>)> {
    let model = load_model(&args.problem)?;
    let x = match &args.at {
        Some(c) => DVector::from_column_slice(c),
        None => model.anchor().clone(),
    };
    if x.len() != model.dim() {
        bail!("--at has {} coordinates, the model has dimension {}", x.len(), model.dim());
    }
    Ok((model, x))
}

fn subdiff(args: PointArgs) -> anyhow::Result<()> {
    let (model, x) = model_and_point(&args)?;
    let est = estimate_df(&model, &x, &DfConfig::default())?;
    print_json(&json!({
        "point": x.as_slice(),
        "subdifferential": PolytopeDoc::from(&est.set),
        "unstable_directions": est.unstable,
    }))
}

fn codiff_cmd(args: PointArgs) -> anyhow::Result<()> {
    let (model, x) = model_and_point(&args)?;
    let cfg = BuildConfig::default();
    let sub = estimate_df(&model, &x, &cfg.df)?.set;
    let hypo = build_hypodifferential(&model, &x, &sub, &cfg)?;
    let alpha = 1e-3;
    let mut worst: f64 = 0.0;
    for g in direction_grid(model.dim()) {
        worst = worst.max(expansion_residual(&model, &x, &hypo, alpha, &g)? / alpha);
    }
    print_json(&json!({
        "point": x.as_slice(),
        "value": model.value(&x),
        "subdifferential": PolytopeDoc::from(&sub),
        "hypodifferential": OffsetSetDoc::from(&hypo),
        "max_offset": hypo.max_offset(),
        "residual_over_alpha_at_1e-3": worst,
    }))
}

fn second(args: PointArgs) -> anyhow::Result<()> {
    let (model, x) = model_and_point(&args)?;
    let res = second_hypodiff_algorithm(&model, &x, &SecondConfig::default())?;
    let route = match res.route {
        MatrixRoute::RayHessians { radius } => json!({ "ray_hessians": { "radius": radius } }),
        MatrixRoute::Smoothing { max_std_err, noisy } => {
            json!({ "smoothing": { "max_std_err": max_std_err, "noisy": noisy } })
        }
    };
    print_json(&json!({
        "point": x.as_slice(),
        "subdifferential": PolytopeDoc::from(&res.subdiff),
        "matrix_set": res.a_set.to_doc(),
        "second_hypodifferential": PolytopeDoc::from(res.hypo2()),
        "route": route,
    }))
}

fn print_json(v: &serde_json::Value) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", serde_json::to_string_pretty(v)?) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}
