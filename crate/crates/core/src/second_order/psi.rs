//! Double ball-average smoothing and its finite-difference Hessians.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::matrix_set::MatrixSet;
use crate::error::{check_dim, Error, Result};
use crate::first_order::BallMapFamily;
use crate::function_models::Objective;
use crate::montecarlo::{mc_means, McEstimate};
use crate::rng::{in_ball, path_seed};

/// `ψ_D(x)`: mean of `f(x + y + z)` with `y`, `z` independent and uniform in
/// the ball frozen at `x`.
pub fn psi_smooth_estimate<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    map: &BallMapFamily,
    mc: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_dim(f.dim(), x.len())?;
    let r = map.frozen_radius(x)?;
    let n = x.len();
    let est = mc_means(mc.div_ceil(2), 1, seed, |rng, out| {
        let s = in_ball(rng, n, r) + in_ball(rng, n, r);
        out[0] = 0.5 * (f.value(&(x + &s)) + f.value(&(x - &s)));
    });
    Ok(est[0])
}

pub fn psi_smooth<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    map: &BallMapFamily,
    mc: usize,
    seed: u64,
) -> Result<f64> {
    psi_smooth_estimate(f, x, map, mc, seed).map(|e| e.mean)
}

fn stencil_offsets(n: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Central second differences of `ψ_D` at `x` with step `h`, with standard
/// errors. Every stencil point reuses the same ball samples.
pub fn psi_hessian<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    map: &BallMapFamily,
    h: f64,
    mc: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_dim(f.dim(), x.len())?;
    if !(h > 0.0) {
        return Err(Error::invalid("difference step must be positive"));
    }
    let i = map.annulus_of(x)?;
    let n = x.len();
    let entries = stencil_offsets(n);
    for &(a, b) in &entries {
        for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let mut p = x.clone();
            p[a] += sa * h;
            p[b] += sb * h;
            if map.annulus_of(&p)? != i {
                return Err(Error::invalid("finite-difference stencil leaves the constancy annulus"));
            }
        }
    }
    let r = map.radius(i);
    let h2 = h * h;
    let est = mc_means(mc.div_ceil(2), entries.len(), seed, |rng, out| {
        let s = in_ball(rng, n, r) + in_ball(rng, n, r);
        out.iter_mut().for_each(|o| *o = 0.0);
        for sign in [1.0, -1.0] {
            let p = x + &s * sign;
            let centre = f.value(&p);
            let at = |a: usize, da: f64, b: usize, db: f64| {
                let mut q = p.clone();
                q[a] += da;
                q[b] += db;
                f.value(&q)
            };
            for (k, &(a, b)) in entries.iter().enumerate() {
                let d = if a == b {
                    let mut q = p.clone();
                    q[a] += h;
                    let up = f.value(&q);
                    q[a] -= 2.0 * h;
                    (up - 2.0 * centre + f.value(&q)) / h2
                } else {
                    (at(a, h, b, h) - at(a, h, b, -h) - at(a, -h, b, h) + at(a, -h, b, -h)) / (4.0 * h2)
                };
                out[k] += 0.5 * d;
            }
        }
    });
    let mut mean = DMatrix::zeros(n, n);
    let mut err = DMatrix::zeros(n, n);
    for (k, &(a, b)) in entries.iter().enumerate() {
        mean[(a, b)] = est[k].mean;
        mean[(b, a)] = est[k].mean;
        err[(a, b)] = est[k].std_err;
        err[(b, a)] = est[k].std_err;
    }
    Ok((mean, err))
}

#[derive(Clone, Debug)]
pub struct PsiConfig {
    /// Empty means [`BallMapFamily::default_family`].
    pub family: Vec<BallMapFamily>,
    pub annuli: Vec<usize>,
    /// Empty selects the same default directions as the first-order
    /// smoothing.
    pub point_dirs: Vec<DVector<f64>>,
    /// Difference step as a fraction of the annulus midpoint radius.
    pub fd_rel: f64,
    pub mc: usize,
    pub seed: u64,
    /// A sample is noisy when an entry's standard error exceeds this fraction
    /// of its Hessian's largest entry.
    pub noise_ratio: f64,
}

impl Default for PsiConfig {
    fn default() -> Self {
        Self {
            family: Vec::new(),
            annuli: vec![40, 60, 80],
            point_dirs: Vec::new(),
            fd_rel: 1e-2,
            mc: 200_000,
            seed: 0x52,
            noise_ratio: 0.1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PsiSample {
    pub point: DVector<f64>,
    pub k: f64,
    pub annulus: usize,
    pub hessian: DMatrix<f64>,
    pub std_err: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct PsiEstimate {
    pub set: MatrixSet,
    pub samples: Vec<PsiSample>,
    pub max_std_err: f64,
    /// Some sample's Monte Carlo error is large against its Hessian.
    pub noisy: bool,
}

/// `Ψ²f(x₀)`: hull of smoothed Hessians at annulus midpoints over the family.
pub fn estimate_psi2<F: Objective + ?Sized>(f: &F, x0: &DVector<f64>, cfg: &PsiConfig) -> Result<PsiEstimate> {
    check_dim(f.dim(), x0.len())?;
    let family = if cfg.family.is_empty() {
        BallMapFamily::default_family(x0)
    } else {
        cfg.family.clone()
    };
    let dirs = if cfg.point_dirs.is_empty() {
        crate::first_order::default_point_dirs(x0.len())
    } else {
        cfg.point_dirs.clone()
    };
    if cfg.annuli.is_empty() {
        return Err(Error::invalid("no annuli selected"));
    }
    let mut tasks = Vec::new();
    for (a, map) in family.iter().enumerate() {
        check_dim(x0.len(), map.dim())?;
        for &i in &cfg.annuli {
            for (d, u) in dirs.iter().enumerate() {
                tasks.push((a, i, d, x0 + u * map.annulus_mid(i)));
            }
        }
    }
    let samples: Vec<PsiSample> = tasks
        .par_iter()
        .map(|(a, i, d, x)| {
            let map = &family[*a];
            let h = cfg.fd_rel * map.annulus_mid(*i);
            let seed = path_seed(cfg.seed, &[*a as u64, *i as u64, *d as u64]);
            let (hessian, std_err) = psi_hessian(f, x, map, h, cfg.mc, seed)?;
            Ok(PsiSample {
                point: x.clone(),
                k: map.k,
                annulus: *i,
                hessian,
                std_err,
            })
        })
        .collect::<Result<_>>()?;
    let max_std_err = samples.iter().map(|s| s.std_err.amax()).fold(0.0, f64::max);
    let noisy = samples
        .iter()
        .any(|s| s.std_err.amax() > cfg.noise_ratio * s.hessian.amax());
    let set = MatrixSet::new(&samples.iter().map(|s| s.hessian.clone()).collect::<Vec<_>>())?;
    Ok(PsiEstimate {
        set,
        samples,
        max_std_err,
        noisy,
    })
}
