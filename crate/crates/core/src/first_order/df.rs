use nalgebra::{DVector, Vector3};
use rayon::prelude::*;

use super::curve::{averaged_gradient, Curve, Quadrature};
use super::grids::{direction_grid, AlphaSchedule};
use crate::convex_geometry::Polytope;
use crate::error::{check_dim, Error, Result};
use crate::function_models::Objective;
use crate::rng::{child_seed, in_ball, path_seed, stream};

/// Which curves through `x` are averaged along.
#[derive(Clone, Debug, Default)]
pub enum CurvePolicy {
    #[default]
    Lines,
    /// Lines plus `count` curves per direction with random bends of norm at
    /// most `scale`.
    Perturbed { count: usize, scale: f64 },
}

#[derive(Clone, Debug)]
pub struct DfConfig {
    /// `None` selects [`direction_grid`].
    pub directions: Option<Vec<DVector<f64>>>,
    pub alphas: AlphaSchedule,
    pub curves: CurvePolicy,
    pub quadrature: Quadrature,
    /// Stabilization tolerance; `None` means `1e-6` times the Lipschitz hint.
    pub stab_tol: Option<f64>,
    /// Bisect between neighbouring directions with different limits and
    /// probe facet normals of the running hull.
    pub refine: bool,
    /// Cap on directions added by refinement.
    pub refine_budget: usize,
    /// Replace a settled limit by its linear extrapolation to `α = 0` from the
    /// last two levels.
    pub extrapolate: bool,
    pub seed: u64,
}

impl Default for DfConfig {
    fn default() -> Self {
        Self {
            directions: None,
            alphas: AlphaSchedule::default(),
            curves: CurvePolicy::Lines,
            quadrature: Quadrature::default(),
            stab_tol: None,
            refine: true,
            refine_budget: 20_000,
            extrapolate: true,
            seed: 0xDF,
        }
    }
}

/// Per-direction record of the limit search.
#[derive(Clone, Debug)]
pub struct DirectionDiagnostic {
    pub direction: DVector<f64>,
    /// Smallest averaging length used.
    pub alpha_last: f64,
    /// Estimate at `alpha_last`.
    pub value: DVector<f64>,
    /// `|v(α_{K-1}) − v(α_K)|`.
    pub residual: f64,
    pub stabilized: bool,
}

#[derive(Clone, Debug)]
pub struct DfEstimate {
    pub set: Polytope,
    pub diagnostics: Vec<DirectionDiagnostic>,
    /// Directions whose averaged gradients did not settle; their tail values
    /// are all included in `set`.
    pub unstable: usize,
}

impl DfEstimate {
    pub fn stabilized(&self) -> bool {
        self.unstable == 0
    }
}

struct Probe {
    diag: DirectionDiagnostic,
    cluster: Vec<DVector<f64>>,
}

struct Ctx<'a, F: ?Sized> {
    f: &'a F,
    x: &'a DVector<f64>,
    cfg: &'a DfConfig,
    tol: f64,
}

impl<F: Objective + ?Sized> Ctx<'_, F> {
    fn probe(&self, g: &DVector<f64>, salt: u64) -> Result<Probe> {
        let amax = self.cfg.alphas.largest();
        let mut curves = vec![Curve::line(self.x.clone(), g.clone(), amax)?];
        if let CurvePolicy::Perturbed { count, scale } = self.cfg.curves {
            let mut rng = stream(path_seed(self.cfg.seed, &[1, salt]));
            for _ in 0..count {
                let p = in_ball(&mut rng, g.len(), scale);
                curves.push(Curve::new(self.x.clone(), g.clone(), p, amax)?);
            }
        }
        let mut cluster = Vec::new();
        let mut first: Option<DirectionDiagnostic> = None;
        let mut residual_max: f64 = 0.0;
        for curve in &curves {
            let vals = self
                .cfg
                .alphas
                .values()
                .iter()
                .map(|&a| averaged_gradient(self.f, curve, a, &self.cfg.quadrature).map(|r| r.value))
                .collect::<Result<Vec<_>>>()?;
            let k = vals.len() - 1;
            let residual = if k == 0 { 0.0 } else { (&vals[k] - &vals[k - 1]).norm() };
            residual_max = residual_max.max(residual);
            if residual <= self.tol {
                let alphas = self.cfg.alphas.values();
                if self.cfg.extrapolate && k > 0 {
                    let w = alphas[k] / (alphas[k - 1] - alphas[k]);
                    cluster.push(&vals[k] + (&vals[k] - &vals[k - 1]) * w);
                } else {
                    cluster.push(vals[k].clone());
                }
            } else {
                // no limit along this schedule: keep every tail value
                cluster.extend(vals[k / 2..].iter().cloned());
            }
            if first.is_none() {
                first = Some(DirectionDiagnostic {
                    direction: g.clone(),
                    alpha_last: self.cfg.alphas.smallest(),
                    value: vals[k].clone(),
                    residual,
                    stabilized: residual <= self.tol,
                });
            }
        }
        let mut diag = first.expect("at least the line curve");
        diag.residual = residual_max;
        diag.stabilized = residual_max <= self.tol;
        Ok(Probe { diag, cluster })
    }

    fn differs(&self, a: &Probe, b: &Probe) -> bool {
        let arc = a.diag.direction.dot(&b.diag.direction).clamp(-1.0, 1.0).acos();
        let jump = (&a.diag.value - &b.diag.value).norm();
        jump > 10.0 * self.tol + 4.0 * self.f.lipschitz_hint() * arc
    }

    fn bisect(&self, a: &Probe, b: &Probe, depth: usize, salt: u64, out: &mut Vec<Probe>, budget: usize) -> Result<()> {
        if depth > 48 || out.len() >= budget || !self.differs(a, b) {
            return Ok(());
        }
        let mut mid = &a.diag.direction + &b.diag.direction;
        if mid.norm() < 1e-12 {
            return Ok(());
        }
        mid /= mid.norm();
        if a.diag.direction.dot(&mid).clamp(-1.0, 1.0).acos() < 1e-10 {
            return Ok(());
        }
        let m = self.probe(&mid, child_seed(salt, depth as u64))?;
        self.bisect(a, &m, depth + 1, child_seed(salt, 2 * depth as u64 + 1), out, budget)?;
        self.bisect(&m, b, depth + 1, child_seed(salt, 2 * depth as u64 + 2), out, budget)?;
        out.push(m);
        Ok(())
    }
}

fn neighbour_pairs(dirs: &[DVector<f64>]) -> Vec<(usize, usize)> {
    let n = dirs.len();
    if n < 2 {
        return Vec::new();
    }
    match dirs[0].len() {
        1 => Vec::new(),
        2 => {
            let mut order: Vec<usize> = (0..n).collect();
            let ang = |i: usize| dirs[i][1].atan2(dirs[i][0]);
            order.sort_by(|&a, &b| ang(a).total_cmp(&ang(b)));
            (0..n).map(|k| (order[k], order[(k + 1) % n])).collect()
        }
        d => {
            let k = (2 * d).min(n - 1);
            let mut pairs = Vec::new();
            for i in 0..n {
                let mut near: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (-dirs[i].dot(&dirs[j]), j))
                    .collect();
                near.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
                pairs.extend(near[..k].iter().filter(|(_, j)| i < *j).map(|&(_, j)| (i, j)));
            }
            pairs
        }
    }
}

/// Outward facet normals of the hull of `pts` in dimension 2 or 3. Lower
/// dimensional hulls contribute both normals of their affine span and the
/// in-span edge normals.
pub(crate) fn facet_normals(pts: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let m = pts.len();
    let mut normals: Vec<DVector<f64>> = Vec::new();
    let push = |n: DVector<f64>, normals: &mut Vec<DVector<f64>>| {
        let n = &n / n.norm();
        if !normals.iter().any(|q| q.dot(&n) > 1.0 - 1e-12) {
            normals.push(n);
        }
    };
    if m < 2 {
        return normals;
    }
    match pts[0].len() {
        2 => {
            for i in 0..m {
                for j in (i + 1)..m {
                    let d = &pts[j] - &pts[i];
                    if d.norm() < tol {
                        continue;
                    }
                    let n = DVector::from_vec(vec![-d[1], d[0]]);
                    let sides: Vec<f64> = pts.iter().map(|p| (p - &pts[i]).dot(&n) / n.norm()).collect();
                    let above = sides.iter().any(|&s| s > tol);
                    let below = sides.iter().any(|&s| s < -tol);
                    if !above {
                        push(n.clone(), &mut normals);
                    }
                    if !below {
                        push(-n, &mut normals);
                    }
                }
            }
        }
        3 => {
            let p3: Vec<Vector3<f64>> = pts.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect();
            let mut plane: Option<Vector3<f64>> = None;
            for i in 0..m {
                for j in (i + 1)..m {
                    for k in (j + 1)..m {
                        let n = (p3[j] - p3[i]).cross(&(p3[k] - p3[i]));
                        let len = n.norm();
                        if len < tol * tol {
                            continue;
                        }
                        let sides: Vec<f64> = p3.iter().map(|p| (p - p3[i]).dot(&n) / len).collect();
                        let above = sides.iter().any(|&s| s > tol);
                        let below = sides.iter().any(|&s| s < -tol);
                        if !above && !below {
                            plane = Some(n / len);
                        }
                        if !above {
                            push(DVector::from_column_slice(n.as_slice()), &mut normals);
                        }
                        if !below {
                            push(DVector::from_column_slice((-n).as_slice()), &mut normals);
                        }
                    }
                }
            }
            if let Some(u) = plane {
                // flat hull: also probe outward edge normals inside the plane
                for i in 0..m {
                    for j in (i + 1)..m {
                        let e = p3[j] - p3[i];
                        if e.norm() < tol {
                            continue;
                        }
                        let n = u.cross(&e);
                        let sides: Vec<f64> = p3.iter().map(|p| (p - p3[i]).dot(&n) / n.norm()).collect();
                        if !sides.iter().any(|&s| s > tol) {
                            push(DVector::from_column_slice(n.as_slice()), &mut normals);
                        }
                        if !sides.iter().any(|&s| s < -tol) {
                            push(DVector::from_column_slice((-n).as_slice()), &mut normals);
                        }
                    }
                }
            }
        }
        _ => {}
    }
    normals
}

/// `Df(x)`: the hull of limits of averaged gradients over the direction grid.
pub fn estimate_df<F: Objective + ?Sized>(f: &F, x: &DVector<f64>, cfg: &DfConfig) -> Result<DfEstimate> {
    check_dim(f.dim(), x.len())?;
    let dirs = match &cfg.directions {
        Some(d) if d.is_empty() => return Err(Error::invalid("direction grid is empty")),
        Some(d) => {
            for g in d {
                check_dim(x.len(), g.len())?;
            }
            d.clone()
        }
        None => direction_grid(x.len()),
    };
    let tol = cfg.stab_tol.unwrap_or(1e-6 * f.lipschitz_hint());
    let ctx = Ctx { f, x, cfg, tol };

    let mut probes: Vec<Probe> = dirs
        .par_iter()
        .enumerate()
        .map(|(i, g)| ctx.probe(g, i as u64))
        .collect::<Result<_>>()?;

    if cfg.refine && x.len() >= 2 {
        let pairs = neighbour_pairs(&dirs);
        let per_pair = (cfg.refine_budget / pairs.len().max(1)).max(64);
        let extra: Vec<Vec<Probe>> = pairs
            .par_iter()
            .enumerate()
            .filter(|(_, (i, j))| ctx.differs(&probes[*i], &probes[*j]))
            .map(|(k, &(i, j))| {
                let mut out = Vec::new();
                ctx.bisect(&probes[i], &probes[j], 0, path_seed(cfg.seed, &[2, k as u64]), &mut out, per_pair)?;
                Ok(out)
            })
            .collect::<Result<_>>()?;
        probes.extend(extra.into_iter().flatten());

        if x.len() <= 3 {
            let mut probed: Vec<DVector<f64>> = Vec::new();
            for round in 0..12 {
                let pts: Vec<DVector<f64>> = probes.iter().flat_map(|p| p.cluster.iter().cloned()).collect();
                let hull = Polytope::new(pts)?;
                let scale = hull.vertices().iter().map(|v| v.amax()).fold(1.0, f64::max);
                let normals: Vec<DVector<f64>> = facet_normals(hull.vertices(), 1e-9 * scale)
                    .into_iter()
                    .filter(|n| !probed.iter().any(|q| q.dot(n) > 1.0 - 1e-12))
                    .collect();
                if normals.is_empty() {
                    break;
                }
                let new: Vec<Probe> = normals
                    .par_iter()
                    .enumerate()
                    .map(|(i, n)| ctx.probe(n, path_seed(cfg.seed, &[3, round, i as u64])))
                    .collect::<Result<_>>()?;
                probed.extend(normals);
                let grew = new.iter().any(|p| {
                    p.cluster
                        .iter()
                        .any(|v| hull.distance_to(v) > 1e-9 * scale)
                });
                probes.extend(new);
                if !grew {
                    break;
                }
            }
        }
    }

    let unstable = probes.iter().filter(|p| !p.diag.stabilized).count();
    let pts: Vec<DVector<f64>> = probes.iter().flat_map(|p| p.cluster.iter().cloned()).collect();
    Ok(DfEstimate {
        set: Polytope::new(pts)?,
        diagnostics: probes.into_iter().map(|p| p.diag).collect(),
        unstable,
    })
}

/// A limit along a schedule with its stabilization record.
#[derive(Clone, Debug)]
pub struct Stabilized {
    pub value: f64,
    pub alpha_last: f64,
    pub residual: f64,
    pub stabilized: bool,
}

/// `lim (f(x + αg) − f(x)) / α` along the schedule.
pub fn directional_derivative<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    g: &DVector<f64>,
    schedule: &AlphaSchedule,
    tol: f64,
) -> Result<Stabilized> {
    check_dim(f.dim(), x.len())?;
    check_dim(x.len(), g.len())?;
    if (g.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("direction must be a unit vector"));
    }
    let fx = f.value(x);
    let q: Vec<f64> = schedule
        .values()
        .iter()
        .map(|&a| (f.value(&(x + g * a)) - fx) / a)
        .collect();
    let k = q.len() - 1;
    let residual = if k == 0 { 0.0 } else { (q[k] - q[k - 1]).abs() };
    Ok(Stabilized {
        value: q[k],
        alpha_last: schedule.smallest(),
        residual,
        stabilized: residual <= tol,
    })
}

/// Hull of gradients sampled at `samples` random points within `radius` of
/// `x`; a finite stand-in for the limit-gradient (Clarke) hull.
pub fn limit_gradient_hull<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<Polytope> {
    check_dim(f.dim(), x.len())?;
    if !(radius > 0.0) || samples == 0 {
        return Err(Error::invalid("need a positive radius and at least one sample"));
    }
    let mut rng = stream(seed);
    let mut grads = Vec::with_capacity(samples);
    for _ in 0..samples {
        let y = x + in_ball(&mut rng, x.len(), radius);
        if let Ok(g) = f.gradient(&y) {
            grads.push(g);
        }
    }
    if grads.is_empty() {
        return Err(Error::DegenerateInput("no differentiable sample point".into()));
    }
    Polytope::new(grads)
}
