//! Experiment suites, report rows and report files.
//!
//! Without a problem file a suite runs its part of the acceptance battery,
//! one summary row `C<k>` per criterion followed by its checks `C<k>.<name>`.
//! With a problem file the suite checks that model at its anchor under the
//! ids `P` and `P.<name>`.

pub mod battery;
mod criteria;
mod report;
mod settings;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::codifferential::{build_hypodifferential, expansion_residual, BuildConfig, ContinuityProfile};
use crate::convex_geometry::exact_fan::exact_demyanov_difference;
use crate::convex_geometry::{hausdorff_distance, DirectionSampler};
use crate::error::{Error, Result};
use crate::first_order::{direction_grid, estimate_df, quasi_difference, DfConfig};
use crate::function_models::{load_model, MaxMinQuadModel};
use crate::rng::path_seed;
use crate::second_order::{second_expansion_residual, second_hypodiff_algorithm, SecondConfig};

pub use criteria::CriterionOutput;
use criteria::Ctx;
pub use report::{emit_continuity_table, write_rows_csv, ReportRow};
use report::{ensure_dir, RowSet};
pub use settings::{parse_override, Budgets, ExperimentConfig, Suite, Tolerances};

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub config: ExperimentConfig,
    /// Sorted by case id.
    pub rows: Vec<ReportRow>,
    pub profiles: Vec<(String, ContinuityProfile)>,
}

impl SuiteReport {
    pub fn failed(&self) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

type CriterionFn = fn(&Ctx) -> Result<CriterionOutput>;

fn criteria_for(suite: Suite) -> Vec<CriterionFn> {
    let mut out: Vec<CriterionFn> = Vec::new();
    if suite.covers(Suite::Demyanov) {
        out.push(criteria::c1_demyanov);
    }
    if suite.covers(Suite::FirstOrder) {
        out.extend([criteria::c2_max_affine as CriterionFn, criteria::c3_dc, criteria::c4_phi]);
    }
    if suite.covers(Suite::SecondOrder) {
        out.extend([criteria::c5_ph2 as CriterionFn, criteria::c6_second]);
    }
    if suite.covers(Suite::Codiff) {
        out.push(criteria::c7_codiff);
    }
    if suite.covers(Suite::Sawtooth) {
        out.push(criteria::c8_sawtooth);
    }
    out
}

/// Runs the selected suite. Identical configurations give identical rows
/// (apart from `runtime_ms` when timing is on).
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    let ctx = Ctx {
        seed: cfg.seed,
        tol: &cfg.tolerances,
        budget: &cfg.budgets,
        timing: cfg.timing,
    };
    let mut rows = Vec::new();
    let mut profiles = Vec::new();
    match &cfg.problem {
        None => {
            for c in criteria_for(cfg.suite) {
                let out = c(&ctx)?;
                rows.extend(out.rows);
                profiles.extend(out.profiles);
            }
        }
        Some(path) => {
            let model = load_model(path)?;
            let out = problem_rows(&model, cfg.suite, &ctx)?;
            rows.extend(out.rows);
            if cfg.suite.covers(Suite::Sawtooth) {
                let out = criteria::c8_sawtooth(&ctx)?;
                rows.extend(out.rows);
                profiles.extend(out.profiles);
            }
        }
    }
    rows.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    Ok(SuiteReport {
        config: cfg.clone(),
        rows,
        profiles,
    })
}

fn problem_rows(model: &MaxMinQuadModel, suite: Suite, ctx: &Ctx) -> Result<CriterionOutput> {
    let mut rows = RowSet::new(suite.name(), "P", ctx.timing);
    let t = Instant::now();
    let n = model.dim();
    let x = model.anchor().clone();
    let pair = model.anchor_quasidifferential()?;
    let sampler = DirectionSampler::with_seed(path_seed(ctx.seed, &[9]));
    let canonical = if n <= 2 {
        exact_demyanov_difference(&pair.lower, &pair.upper.negate())?
    } else {
        quasi_difference(&pair, &sampler)?
    };
    let ms = |t: Instant| t.elapsed().as_secs_f64() * 1e3;
    if suite.covers(Suite::Demyanov) && n <= 2 {
        let tk = Instant::now();
        let sampled = quasi_difference(&pair, &sampler)?;
        rows.le(
            "demyanov",
            "rho_H(lower - (-upper) sampled, exact fan)",
            hausdorff_distance(&sampled, &canonical)?,
            ctx.tol.demyanov,
            ms(tk),
        );
    }
    let needs_df = suite.covers(Suite::FirstOrder) || suite.covers(Suite::Codiff);
    let df = if needs_df {
        Some(estimate_df(model, &x, &DfConfig::default())?)
    } else {
        None
    };
    if let (true, Some(df)) = (suite.covers(Suite::FirstOrder), &df) {
        let note = if df.unstable > 0 {
            format!("unstable directions: {}", df.unstable)
        } else {
            String::new()
        };
        rows.le_flagged(
            "df",
            "rho_H(Df, canonical)",
            hausdorff_distance(&df.set, &canonical)?,
            ctx.tol.df,
            note,
            ms(t),
        );
    }
    if let (true, Some(df)) = (suite.covers(Suite::Codiff), &df) {
        let tk = Instant::now();
        let build = BuildConfig::default();
        let hypo = build_hypodifferential(model, &x, &df.set, &build)?;
        rows.le("offset", "|max offset|", hypo.max_offset().abs(), ctx.tol.offset, 0.0);
        rows.le(
            "slice",
            "rho_H(zero-offset slice, canonical)",
            hausdorff_distance(&hypo.zero_slice()?, &canonical)?,
            ctx.tol.slice,
            0.0,
        );
        let alpha = 1e-3;
        let mut worst: f64 = 0.0;
        for g in direction_grid(n) {
            worst = worst.max(expansion_residual(model, &x, &hypo, alpha, &g)? / alpha);
        }
        rows.le("residual", "max residual/alpha at alpha=1e-3", worst, ctx.tol.residual1, ms(tk));
    }
    if suite.covers(Suite::SecondOrder) && model.hyper_pieces().is_empty() {
        let tk = Instant::now();
        let res = second_hypodiff_algorithm(model, &x, &SecondConfig::default())?;
        let alpha = 1e-2;
        let mut worst: f64 = 0.0;
        for g in direction_grid(n) {
            worst = worst.max(second_expansion_residual(model, &x, &res.codiff, alpha, &g)? / (alpha * alpha));
        }
        rows.le(
            "residual2",
            "max second-order residual/alpha^2 at alpha=1e-2",
            worst,
            ctx.tol.residual2,
            ms(tk),
        );
    }
    Ok(rows.finish(ms(t)))
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    passed: bool,
    rows: usize,
    failed: Vec<&'a str>,
    report: &'a [ReportRow],
}

/// Writes `report.csv`, `summary.json` and one CSV per continuity profile
/// into `dir`; returns the paths written.
pub fn write_reports(report: &SuiteReport, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("report.csv");
    write_rows_csv(&report.rows, &csv_path)?;
    written.push(csv_path);
    for (name, profile) in &report.profiles {
        let p = dir.join(format!("{name}.csv"));
        emit_continuity_table(profile, &p)?;
        written.push(p);
    }
    let summary = Summary {
        config: &report.config,
        passed: report.passed(),
        rows: report.rows.len(),
        failed: report.failed().iter().map(|r| r.case_id.as_str()).collect(),
        report: &report.rows,
    };
    let json_path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::io(&json_path, std::io::Error::other(e)))?;
    std::fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    written.push(json_path);
    Ok(written)
}
