//! Continuous first codifferentials built from averaged gradients.
//!
//! For a point `x` with subdifferential estimate `∂f(x)`, every averaging
//! length `β` and direction `g` contributes the pair
//! `[−β·dist(v(β,g), ∂f(x)), v(β,g)]`, offset first. The hypodifferential is
//! the hull of these pairs together with their `β → 0` closure `{0} × ∂f(x)`.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex_geometry::{hausdorff_distance, Polytope, SetPair};
use crate::error::{check_dim, Error, Result};
use crate::first_order::{averaged_gradient, direction_grid, estimate_df, AlphaSchedule, Curve, DfConfig, Quadrature};
use crate::function_models::Objective;

/// Tolerance for the offset normalization checks.
pub const OFFSET_TOL: f64 = 1e-9;

fn lift(offset: f64, v: &DVector<f64>) -> DVector<f64> {
    let mut p = DVector::zeros(v.len() + 1);
    p[0] = offset;
    p.rows_mut(1, v.len()).copy_from(v);
    p
}

fn split(p: &DVector<f64>) -> (f64, DVector<f64>) {
    (p[0], p.rows(1, p.len() - 1).into_owned())
}

/// Pairs `[a, v]` with `a ≤ 0` and `max a = 0`; coordinate 0 holds `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypodifferential {
    set: Polytope,
}

/// Pairs `[b, w]` with `b ≥ 0` and `min b = 0`; coordinate 0 holds `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperdifferential {
    set: Polytope,
}

fn check_offsets(set: &Polytope, sign: f64) -> Result<()> {
    if set.dim() < 2 {
        return Err(Error::invalid("offset sets live in R^(n+1) with n ≥ 1"));
    }
    let offs: Vec<f64> = set.vertices().iter().map(|p| sign * p[0]).collect();
    let top = offs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top.abs() > OFFSET_TOL || offs.iter().any(|&a| a > OFFSET_TOL) {
        return Err(Error::invalid(format!(
            "offsets must satisfy {} with extreme value 0, extreme is {}",
            if sign > 0.0 { "a ≤ 0" } else { "b ≥ 0" },
            sign * top
        )));
    }
    Ok(())
}

fn zero_slice(set: &Polytope, tol: f64) -> Result<Polytope> {
    let face: Vec<DVector<f64>> = set
        .vertices()
        .iter()
        .filter(|p| p[0].abs() <= tol)
        .map(|p| split(p).1)
        .collect();
    if face.is_empty() {
        return Err(Error::DegenerateInput("no vertex with zero offset".into()));
    }
    Polytope::new(face)
}

impl Hypodifferential {
    pub fn new(set: Polytope) -> Result<Self> {
        check_offsets(&set, 1.0)?;
        Ok(Self { set })
    }

    /// Hull of `[a_i, v_i]`; the offsets are shifted so the largest is 0.
    pub fn from_pairs(pairs: &[(f64, DVector<f64>)]) -> Result<Self> {
        let top = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let pts = pairs.iter().map(|(a, v)| lift(a - top, v)).collect();
        Self::new(Polytope::new(pts)?)
    }

    pub fn dim(&self) -> usize {
        self.set.dim() - 1
    }

    pub fn as_polytope(&self) -> &Polytope {
        &self.set
    }

    pub fn pairs(&self) -> Vec<(f64, DVector<f64>)> {
        self.set.vertices().iter().map(split).collect()
    }

    pub fn max_offset(&self) -> f64 {
        self.set.vertices().iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `{v : [0, v] ∈ hypo}`.
    pub fn zero_slice(&self) -> Result<Polytope> {
        zero_slice(&self.set, OFFSET_TOL)
    }

    /// `max [a + (v, Δ)]` over the set.
    pub fn expansion(&self, delta: &DVector<f64>) -> f64 {
        self.set
            .vertices()
            .iter()
            .map(|p| {
                let (a, v) = split(p);
                a + v.dot(delta)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Hyperdifferential {
    pub fn new(set: Polytope) -> Result<Self> {
        check_offsets(&set, -1.0)?;
        Ok(Self { set })
    }

    pub fn dim(&self) -> usize {
        self.set.dim() - 1
    }

    pub fn as_polytope(&self) -> &Polytope {
        &self.set
    }

    pub fn zero_slice(&self) -> Result<Polytope> {
        zero_slice(&self.set, OFFSET_TOL)
    }

    /// `min [b + (w, Δ)]` over the set.
    pub fn expansion(&self, delta: &DVector<f64>) -> f64 {
        self.set
            .vertices()
            .iter()
            .map(|p| {
                let (b, w) = split(p);
                b + w.dot(delta)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodifferentialPair {
    pub hypo: Hypodifferential,
    pub hyper: Hyperdifferential,
}

impl CodifferentialPair {
    pub fn new(hypo: Hypodifferential, hyper: Hyperdifferential) -> Result<Self> {
        check_dim(hypo.dim(), hyper.dim())?;
        Ok(Self { hypo, hyper })
    }

    pub fn dim(&self) -> usize {
        self.hypo.dim()
    }

    /// `max [a + (v,Δ)] + min [b + (w,Δ)]`.
    pub fn expansion(&self, delta: &DVector<f64>) -> f64 {
        self.hypo.expansion(delta) + self.hyper.expansion(delta)
    }
}

/// Wire form: the polytope in `R^(n+1)` plus the index of the offset
/// coordinate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OffsetSetDoc {
    pub dim: usize,
    pub offset_index: usize,
    pub vertices: Vec<Vec<f64>>,
}

impl From<&Hypodifferential> for OffsetSetDoc {
    fn from(h: &Hypodifferential) -> Self {
        Self {
            dim: h.set.dim(),
            offset_index: 0,
            vertices: h.set.to_rows(),
        }
    }
}

impl From<&Hyperdifferential> for OffsetSetDoc {
    fn from(h: &Hyperdifferential) -> Self {
        Self {
            dim: h.set.dim(),
            offset_index: 0,
            vertices: h.set.to_rows(),
        }
    }
}

impl OffsetSetDoc {
    pub fn to_hypo(&self) -> Result<Hypodifferential> {
        if self.offset_index != 0 {
            return Err(Error::invalid("offset coordinate must be index 0"));
        }
        Hypodifferential::new(Polytope::from_rows(&self.vertices)?)
    }
}

/// Grids for the constructions in this module.
#[derive(Clone, Debug)]
pub struct BuildConfig {
    /// Averaging lengths `β`; the largest is the validity radius `α₀`.
    pub betas: AlphaSchedule,
    /// `None` selects [`direction_grid`].
    pub directions: Option<Vec<DVector<f64>>>,
    pub quadrature: Quadrature,
    /// Used wherever a subdifferential has to be estimated first.
    pub df: DfConfig,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            betas: AlphaSchedule::default(),
            directions: None,
            quadrature: Quadrature::default(),
            df: DfConfig::default(),
        }
    }
}

impl BuildConfig {
    fn dirs(&self, dim: usize) -> Result<Vec<DVector<f64>>> {
        match &self.directions {
            Some(d) if d.is_empty() => Err(Error::invalid("direction grid is empty")),
            Some(d) => {
                for g in d {
                    check_dim(dim, g.len())?;
                }
                Ok(d.clone())
            }
            None => Ok(direction_grid(dim)),
        }
    }
}

fn averaged_table<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    cfg: &BuildConfig,
) -> Result<Vec<(f64, DVector<f64>)>> {
    check_dim(f.dim(), x.len())?;
    let dirs = cfg.dirs(x.len())?;
    let amax = cfg.betas.largest();
    let rows: Vec<Vec<(f64, DVector<f64>)>> = dirs
        .par_iter()
        .map(|g| {
            let curve = Curve::line(x.clone(), g.clone(), amax)?;
            cfg.betas
                .values()
                .iter()
                .map(|&b| Ok((b, averaged_gradient(f, &curve, b, &cfg.quadrature)?.value)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `V(x)`: hull of `v(α, g)` over the whole grid, no limit taken.
pub fn build_v<F: Objective + ?Sized>(f: &F, x: &DVector<f64>, cfg: &BuildConfig) -> Result<Polytope> {
    Polytope::new(averaged_table(f, x, cfg)?.into_iter().map(|(_, v)| v).collect())
}

pub fn build_hypodifferential<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    subdiff: &Polytope,
    cfg: &BuildConfig,
) -> Result<Hypodifferential> {
    check_dim(x.len(), subdiff.dim())?;
    let mut pairs: Vec<(f64, DVector<f64>)> = averaged_table(f, x, cfg)?
        .into_iter()
        .map(|(b, v)| (-b * subdiff.distance_to(&v), v))
        .collect();
    // β → 0 closure
    pairs.extend(subdiff.vertices().iter().map(|v| (0.0, v.clone())));
    let pts = pairs.iter().map(|(a, v)| lift(*a, v)).collect();
    Hypodifferential::new(Polytope::new(pts)?)
}

/// `|f(x+αg) − f(x) − max [a + α(v,g)]|`.
pub fn expansion_residual<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    hypo: &Hypodifferential,
    alpha: f64,
    g: &DVector<f64>,
) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    check_dim(x.len(), hypo.dim())?;
    check_dim(x.len(), g.len())?;
    if !(alpha > 0.0) {
        return Err(Error::invalid("expansion step must be positive"));
    }
    let step = g * alpha;
    Ok((f.value(&(x + &step)) - f.value(x) - hypo.expansion(&step)).abs())
}

/// `hypo = co({0} × vert ∂̲ ∪ {−a₀} × vert ∂̲)`, `hyper` mirrored with `+b₀`.
pub fn assemble_codifferential(pair: &SetPair, a0: f64, b0: f64) -> Result<CodifferentialPair> {
    if !(a0 > 0.0 && b0 > 0.0) {
        return Err(Error::invalid("offset depths a0 and b0 must be positive"));
    }
    let layer = |set: &Polytope, depth: f64| -> Vec<DVector<f64>> {
        set.vertices()
            .iter()
            .flat_map(|v| [lift(0.0, v), lift(depth, v)])
            .collect()
    };
    let hypo = Hypodifferential::new(Polytope::new(layer(&pair.lower, -a0))?)?;
    let hyper = Hyperdifferential::new(Polytope::new(layer(&pair.upper, b0))?)?;
    CodifferentialPair::new(hypo, hyper)
}

/// One step of a continuity profile.
#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub x: DVector<f64>,
    pub x_next: DVector<f64>,
    pub rho_hypo: f64,
    pub rho_subdiff: f64,
}

#[derive(Clone, Debug)]
pub struct ContinuityProfile {
    pub rows: Vec<ProfileRow>,
}

impl ContinuityProfile {
    pub fn max_hypo_step(&self) -> f64 {
        self.rows.iter().map(|r| r.rho_hypo).fold(0.0, f64::max)
    }

    pub fn max_subdiff_step(&self) -> f64 {
        self.rows.iter().map(|r| r.rho_subdiff).fold(0.0, f64::max)
    }
}

/// Hausdorff distances between hypodifferentials (and between subdifferential
/// estimates) at consecutive points of `xs`. Row `i` is the step from
/// `xs[i]` to `xs[i+1]`.
pub fn continuity_profile<F: Objective + ?Sized>(
    f: &F,
    xs: &[DVector<f64>],
    cfg: &BuildConfig,
) -> Result<ContinuityProfile> {
    if xs.len() < 2 {
        return Err(Error::invalid("a profile needs at least two points"));
    }
    for w in xs.windows(2) {
        check_dim(f.dim(), w[0].len())?;
        if w[0] == w[1] {
            return Err(Error::invalid("consecutive profile points must differ"));
        }
    }
    let built: Vec<(Polytope, Hypodifferential)> = xs
        .par_iter()
        .map(|x| {
            let sub = estimate_df(f, x, &cfg.df)?.set;
            let hypo = build_hypodifferential(f, x, &sub, cfg)?;
            Ok((sub, hypo))
        })
        .collect::<Result<_>>()?;
    let rows = built
        .windows(2)
        .zip(xs.windows(2))
        .map(|(w, x)| {
            Ok(ProfileRow {
                x: x[0].clone(),
                x_next: x[1].clone(),
                rho_hypo: hausdorff_distance(w[0].1.as_polytope(), w[1].1.as_polytope())?,
                rho_subdiff: hausdorff_distance(&w[0].0, &w[1].0)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ContinuityProfile { rows })
}

/// Evenly spaced points `center + t·axis` for `t` in `[−half, half]`.
pub fn line_grid(center: &DVector<f64>, axis: &DVector<f64>, half: f64, step: f64) -> Result<Vec<DVector<f64>>> {
    check_dim(center.len(), axis.len())?;
    if !(step > 0.0 && half > 0.0) {
        return Err(Error::invalid("grid step and half-width must be positive"));
    }
    let n = (half / step).round() as i64;
    Ok((-n..=n).map(|k| center + axis * (k as f64 * step)).collect())
}

/// Outcome of refining a profile grid.
#[derive(Clone, Debug)]
pub struct RefinementCheck {
    pub coarse: ContinuityProfile,
    pub fine: ContinuityProfile,
    pub coarse_max: f64,
    pub fine_max: f64,
    /// The largest hypodifferential step did not at least halve.
    pub oscillating: bool,
}

/// Profiles on a grid and on the same interval with `factor` times smaller
/// steps. A continuous map has steps shrinking with the grid; a largest step
/// that does not halve marks a discontinuity.
pub fn refinement_check<F: Objective + ?Sized>(
    f: &F,
    center: &DVector<f64>,
    axis: &DVector<f64>,
    half: f64,
    step: f64,
    factor: usize,
    cfg: &BuildConfig,
) -> Result<RefinementCheck> {
    if factor < 2 {
        return Err(Error::invalid("refinement factor must be at least 2"));
    }
    let coarse = continuity_profile(f, &line_grid(center, axis, half, step)?, cfg)?;
    let fine = continuity_profile(f, &line_grid(center, axis, half, step / factor as f64)?, cfg)?;
    let (c, fm) = (coarse.max_hypo_step(), fine.max_hypo_step());
    Ok(RefinementCheck {
        coarse,
        fine,
        coarse_max: c,
        fine_max: fm,
        oscillating: fm > 0.5 * c,
    })
}

/// `ρ_H(hypo_N, hypo_2N)` where the second grid inserts the geometric
/// midpoint between consecutive averaging lengths.
pub fn grid_refinement_delta<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    subdiff: &Polytope,
    cfg: &BuildConfig,
) -> Result<f64> {
    let coarse = build_hypodifferential(f, x, subdiff, cfg)?;
    let b = cfg.betas.values();
    let mut dense = Vec::with_capacity(2 * b.len());
    for w in b.windows(2) {
        dense.push(w[0]);
        dense.push((w[0] * w[1]).sqrt());
    }
    dense.push(*b.last().expect("nonempty"));
    let fine_cfg = BuildConfig {
        betas: AlphaSchedule::from_values(dense)?,
        ..cfg.clone()
    };
    let fine = build_hypodifferential(f, x, subdiff, &fine_cfg)?;
    hausdorff_distance(coarse.as_polytope(), fine.as_polytope())
}
