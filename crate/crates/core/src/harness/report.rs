use std::fs;
use std::path::Path;

use serde::Serialize;

use super::criteria::CriterionOutput;
use crate::codifferential::ContinuityProfile;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub suite: String,
    pub case_id: String,
    pub quantity: String,
    /// How `value` is compared with `tolerance`: `<=`, `>=`, or `|v-t|<=`
    /// for a target `t` named in `quantity`.
    pub relation: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Warnings such as unsettled limits or noisy Monte Carlo estimates.
    pub note: String,
    pub runtime_ms: f64,
}

/// Collects the rows of one criterion and appends its summary row.
pub(crate) struct RowSet {
    suite: &'static str,
    id: &'static str,
    timing: bool,
    rows: Vec<ReportRow>,
}

impl RowSet {
    pub fn new(suite: &'static str, id: &'static str, timing: bool) -> Self {
        Self {
            suite,
            id,
            timing,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, sub: &str, quantity: String, relation: &str, value: f64, tolerance: f64, pass: bool, note: String, ms: f64) {
        self.rows.push(ReportRow {
            suite: self.suite.into(),
            case_id: format!("{}.{sub}", self.id),
            quantity,
            relation: relation.into(),
            value,
            tolerance,
            pass,
            note,
            runtime_ms: if self.timing { ms } else { 0.0 },
        });
    }

    pub fn le(&mut self, sub: &str, quantity: &str, value: f64, tol: f64, ms: f64) {
        self.le_flagged(sub, quantity, value, tol, String::new(), ms);
    }

    pub fn le_flagged(&mut self, sub: &str, quantity: &str, value: f64, tol: f64, note: String, ms: f64) {
        self.push(sub, quantity.into(), "<=", value, tol, value <= tol, note, ms);
    }

    pub fn ge(&mut self, sub: &str, quantity: &str, value: f64, tol: f64, ms: f64) {
        self.push(sub, quantity.into(), ">=", value, tol, value >= tol, String::new(), ms);
    }

    pub fn near(&mut self, sub: &str, quantity: &str, value: f64, target: f64, tol: f64, ms: f64) {
        let q = format!("{quantity} (target {target})");
        self.push(sub, q, "|v-t|<=", value, tol, (value - target).abs() <= tol, String::new(), ms);
    }

    pub fn finish(mut self, ms: f64) -> CriterionOutput {
        let failed = self.rows.iter().filter(|r| !r.pass).count();
        let summary = ReportRow {
            suite: self.suite.into(),
            case_id: self.id.into(),
            quantity: "failed checks".into(),
            relation: "<=".into(),
            value: failed as f64,
            tolerance: 0.0,
            pass: failed == 0,
            note: String::new(),
            runtime_ms: if self.timing { ms } else { 0.0 },
        };
        self.rows.insert(0, summary);
        CriterionOutput {
            rows: self.rows,
            profiles: Vec::new(),
        }
    }
}

pub fn write_rows_csv(rows: &[ReportRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Writes `x, rho_hypo_step, rho_subdiff_step` per step, then summary rows
/// `max` (largest steps) and `max_per_dx` (largest steps over step length).
pub fn emit_continuity_table(profile: &ContinuityProfile, path: &Path) -> Result<()> {
    if profile.rows.is_empty() {
        return Err(Error::invalid("continuity profile is empty"));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let io = |e| csv_error(path, e);
    w.write_record(["x", "rho_hypo_step", "rho_subdiff_step"]).map_err(io)?;
    let coords = |x: &nalgebra::DVector<f64>| x.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(" ");
    let mut per_dx = (0.0_f64, 0.0_f64);
    for r in &profile.rows {
        w.write_record([coords(&r.x), format!("{}", r.rho_hypo), format!("{}", r.rho_subdiff)])
            .map_err(io)?;
        let dx = (&r.x_next - &r.x).norm();
        if dx > 0.0 {
            per_dx.0 = per_dx.0.max(r.rho_hypo / dx);
            per_dx.1 = per_dx.1.max(r.rho_subdiff / dx);
        }
    }
    w.write_record(["max".into(), format!("{}", profile.max_hypo_step()), format!("{}", profile.max_subdiff_step())])
        .map_err(io)?;
    w.write_record(["max_per_dx".into(), format!("{}", per_dx.0), format!("{}", per_dx.1)])
        .map_err(io)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
