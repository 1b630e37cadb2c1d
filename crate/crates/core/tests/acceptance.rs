//! Acceptance gate: criteria 1 to 8 at their stated tolerances.
//!
//! Each criterion combines the harness rows for it with checks computed here
//! against oracles from `common`, plus its runtime limit where one is stated.
//! One PASS/FAIL line is printed per criterion; the process exits nonzero if
//! any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use codiff::codifferential::{continuity_profile, line_grid, BuildConfig};
use codiff::convex_geometry::{demyanov_difference, hausdorff_distance, DirectionSampler, Polytope};
use codiff::first_order::{circle_grid, estimate_df, DfConfig};
use codiff::function_models::{ph2_from_matrix_set, MaxMinQuadModel};
use codiff::harness::battery::abs_plus_square;
use codiff::harness::{run_suite, ExperimentConfig, ReportRow, Suite};
use codiff::second_order::{
    estimate_matrix_hull_ph2, matrix_hausdorff, second_hypodiff_algorithm, MatrixSet, SecondConfig,
};
use common::{brute_demyanov, hull_hausdorff, random_points, rng, v};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new() -> Self {
        Self {
            pass: true,
            detail: String::new(),
        }
    }

    fn check(&mut self, what: &str, ok: bool, value: impl std::fmt::Display) {
        self.pass &= ok;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        let mark = if ok { "" } else { " (!)" };
        self.detail.push_str(&format!("{what} {value}{mark}"));
    }

    fn rows(&mut self, rows: &BTreeMap<String, ReportRow>, id: &str) {
        let summary = &rows[id];
        let failed: Vec<&str> = rows
            .range(format!("{id}.")..format!("{id}/"))
            .filter(|(_, r)| !r.pass)
            .map(|(k, _)| k.as_str())
            .collect();
        let text = if failed.is_empty() { "all pass".to_string() } else { failed.join(",") };
        self.check("harness", summary.pass, text);
    }

    fn limit(&mut self, elapsed: Duration, limit_s: f64) {
        let s = elapsed.as_secs_f64();
        self.check(&format!("runtime (limit {limit_s} s)"), s < limit_s, format!("{s:.1} s"));
    }
}

fn suite_rows(suite: Suite) -> (BTreeMap<String, ReportRow>, Duration) {
    let cfg = ExperimentConfig {
        suite,
        ..ExperimentConfig::default()
    };
    let t = Instant::now();
    let report = run_suite(&cfg).expect("suite runs");
    let rows = report.rows.into_iter().map(|r| (r.case_id.clone(), r)).collect();
    (rows, t.elapsed())
}

fn criterion_runtime(rows: &BTreeMap<String, ReportRow>, id: &str) -> Duration {
    Duration::from_secs_f64(rows[id].runtime_ms / 1e3)
}

fn points(p: &Polytope) -> Vec<DVector<f64>> {
    p.vertices().to_vec()
}

fn c1() -> Verdict {
    let mut out = Verdict::new();
    let t = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let mut identity: f64 = 0.0;
    for i in 0..200 {
        let dim = 1 + i % 2;
        let a = random_points(&mut r, dim, 6);
        let b = random_points(&mut r, dim, 6);
        let pa = Polytope::new(a.clone()).unwrap();
        let pb = Polytope::new(b.clone()).unwrap();
        let sampler = DirectionSampler::with_seed(i as u64);
        let got = demyanov_difference(&pa, &pb, &sampler).unwrap();
        worst = worst.max(hull_hausdorff(&points(&got), &brute_demyanov(&a, &b)));
        let self_diff = demyanov_difference(&pa, &pa, &sampler).unwrap();
        identity = identity.max(self_diff.radius());
        let zero = demyanov_difference(&pa, &Polytope::origin(dim), &sampler).unwrap();
        identity = identity.max(hull_hausdorff(&points(&zero), &a));
    }
    out.check("oracle rho_H", worst <= 1e-6, format!("{worst:.2e}"));
    out.check("identities", identity <= 1e-6, format!("{identity:.2e}"));
    let (rows, _) = suite_rows(Suite::Demyanov);
    out.rows(&rows, "C1");
    out.limit(t.elapsed(), 60.0);
    out
}

fn random_slopes(r: &mut impl Rng, dim: usize, count: usize) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    while out.len() < count {
        let s = DVector::from_fn(dim, |_, _| r.random_range(-1.0..=1.0));
        if out.iter().all(|w| (w - &s).norm() >= 0.2) {
            out.push(s);
        }
    }
    out
}

fn first_order() -> (Verdict, Verdict, Verdict) {
    let (rows, _) = suite_rows(Suite::FirstOrder);

    let mut c2 = Verdict::new();
    let t = Instant::now();
    let mut r = rng(202);
    for dim in [2, 3] {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let count = r.random_range(dim + 1..=6);
            let slopes = random_slopes(&mut r, dim, count);
            let f = MaxMinQuadModel::max_affine(DVector::zeros(dim), &slopes).unwrap();
            let df = estimate_df(&f, &DVector::zeros(dim), &DfConfig::default()).unwrap().set;
            let d = if dim == 2 {
                hull_hausdorff(&points(&df), &slopes)
            } else {
                hausdorff_distance(&df, &Polytope::new(slopes.clone()).unwrap()).unwrap()
            };
            worst = worst.max(d);
        }
        c2.check(&format!("R{dim} rho_H over 50"), worst <= 1e-3, format!("{worst:.2e}"));
    }
    c2.rows(&rows, "C2");
    c2.limit(t.elapsed() + criterion_runtime(&rows, "C2"), 120.0);

    let mut c3 = Verdict::new();
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let (nv, nw) = (r.random_range(2..=4), r.random_range(2..=3));
        let vs = random_slopes(&mut r, 2, nv);
        let ws = random_slopes(&mut r, 2, nw);
        let f = MaxMinQuadModel::difference_of_convex(DVector::zeros(2), &vs, &ws).unwrap();
        let df = estimate_df(&f, &DVector::zeros(2), &DfConfig::default()).unwrap().set;
        let neg_w: Vec<DVector<f64>> = ws.iter().map(|w| -w).collect();
        worst = worst.max(hull_hausdorff(&points(&df), &brute_demyanov(&vs, &neg_w)));
    }
    c3.check("rho_H over 25", worst <= 1e-3, format!("{worst:.2e}"));
    c3.rows(&rows, "C3");

    let mut c4 = Verdict::new();
    c4.rows(&rows, "C4");
    c4.limit(criterion_runtime(&rows, "C4"), 300.0);
    (c2, c3, c4)
}

fn second_order() -> (Verdict, Verdict) {
    let (rows, _) = suite_rows(Suite::SecondOrder);

    let mut c5 = Verdict::new();
    let diag = [DMatrix::from_diagonal(&v(&[2.0, 0.0])), DMatrix::from_diagonal(&v(&[0.0, 2.0]))];
    let h = ph2_from_matrix_set(&diag).unwrap();
    let hull = estimate_matrix_hull_ph2(&h, &circle_grid(720, 0.0)).unwrap();
    let d = matrix_hausdorff(&hull, &MatrixSet::new(&diag).unwrap()).unwrap();
    c5.check("diagonal hull rho_F", d <= 1e-6, format!("{d:.2e}"));
    c5.rows(&rows, "C5");
    c5.limit(criterion_runtime(&rows, "C5"), 600.0);

    let mut c6 = Verdict::new();
    let f = abs_plus_square().unwrap();
    let res = second_hypodiff_algorithm(&f, &DVector::zeros(1), &SecondConfig::default()).unwrap();
    let sub = hull_hausdorff(&points(&res.subdiff), &[v(&[-1.0]), v(&[1.0])]);
    let a = matrix_hausdorff(&res.a_set, &MatrixSet::new(&[DMatrix::from_element(1, 1, 2.0)]).unwrap()).unwrap();
    c6.check("|x|+x^2 subdifferential", sub <= 1e-3, format!("{sub:.2e}"));
    c6.check("|x|+x^2 matrix set", a <= 0.1, format!("{a:.2e}"));
    c6.rows(&rows, "C6");
    (c5, c6)
}

fn c7() -> Verdict {
    let (rows, _) = suite_rows(Suite::Codiff);
    let mut out = Verdict::new();
    let abs = MaxMinQuadModel::abs_1d();
    let xs = line_grid(&DVector::zeros(1), &v(&[1.0]), 0.1, 0.01).unwrap();
    let profile = continuity_profile(&abs, &xs, &BuildConfig::default()).unwrap();
    let jump = profile.max_subdiff_step();
    let step = profile.max_hypo_step();
    out.check("|x| subdifferential jump", (jump - 2.0).abs() <= 0.01, format!("{jump:.4}"));
    out.check("|x| hypodifferential step", step <= 0.05, format!("{step:.4}"));
    out.rows(&rows, "C7");
    out
}

fn c8() -> Verdict {
    let (rows, _) = suite_rows(Suite::Sawtooth);
    let mut out = Verdict::new();
    out.rows(&rows, "C8");
    for id in ["C8.df_radius", "C8.clarke", "C8.oscillation"] {
        let r = &rows[id];
        out.check(id, r.pass, format!("{:.3e}", r.value));
    }
    out
}

fn main() {
    let t = Instant::now();
    let mut verdicts = vec![(1, "Demyanov difference against the normal-fan oracle", c1())];
    let (c2, c3, c4) = first_order();
    verdicts.push((2, "Df of max-affine models", c2));
    verdicts.push((3, "Df of DC models", c3));
    verdicts.push((4, "smoothing subdifferential against Df", c4));
    let (c5, c6) = second_order();
    verdicts.push((5, "matrix hulls and double smoothing", c5));
    verdicts.push((6, "second-order algorithm", c6));
    verdicts.push((7, "continuous hypodifferential", c7()));
    verdicts.push((8, "sawtooth at the origin", c8()));

    println!();
    for (k, name, v) in &verdicts {
        let mark = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {k} {mark}  {name}: {}", v.detail);
    }
    let failed = verdicts.iter().filter(|(_, _, v)| !v.pass).count();
    println!("{} of {} criteria pass ({:.0} s)", verdicts.len() - failed, verdicts.len(), t.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
