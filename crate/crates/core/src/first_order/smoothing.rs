//! Ball-average smoothing over a piecewise-constant family of ball maps.
//!
//! A [`BallMapFamily`] splits the punctured neighbourhood of `x₀` into
//! annuli `ε_{i+1} < ‖x − x₀‖ ≤ ε_i`, `ε_i = ε₀ρ^i`. On annulus `i` the map is
//! frozen to the ball of radius `k·m_i` about the origin, where `m_i` is the
//! midpoint radius of the annulus. With `k(1 + ρ)/2 > 1` the shifted ball
//! `x + D(x)` always contains `x₀` in its interior, and its diameter shrinks
//! linearly as `x → x₀`.

use nalgebra::DVector;
use rayon::prelude::*;

use super::grids::{circle_grid, fibonacci_sphere};
use crate::convex_geometry::Polytope;
use crate::error::{check_dim, Error, Result};
use crate::function_models::Objective;
use crate::montecarlo::{mc_means, McEstimate};
use crate::rng::{in_ball, path_seed};

#[derive(Clone, Debug, PartialEq)]
pub struct BallMapFamily {
    pub center: DVector<f64>,
    pub k: f64,
    pub eps0: f64,
    pub rho: f64,
}

impl BallMapFamily {
    pub fn new(center: DVector<f64>, k: f64, eps0: f64, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::invalid("annulus ratio must lie in (0, 1)"));
        }
        if !(eps0 > 0.0 && eps0 <= 1.0) {
            return Err(Error::invalid("annulus base must lie in (0, 1]"));
        }
        if !(k * (1.0 + rho) > 2.0) {
            return Err(Error::invalid(format!(
                "radius factor {k} too small: need k(1 + rho)/2 > 1 so that the center stays interior"
            )));
        }
        Ok(Self { center, k, eps0, rho })
    }

    /// `k ∈ {1.05, 1.5, 3}`, `ε₀ = 0.1`, `ρ = 0.95`.
    pub fn default_family(center: &DVector<f64>) -> Vec<Self> {
        [1.05, 1.5, 3.0]
            .iter()
            .map(|&k| Self::new(center.clone(), k, 0.1, 0.95).expect("static parameters"))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn eps(&self, i: usize) -> f64 {
        self.eps0 * self.rho.powi(i as i32)
    }

    pub fn annulus_mid(&self, i: usize) -> f64 {
        0.5 * (self.eps(i) + self.eps(i + 1))
    }

    pub fn annulus_width(&self, i: usize) -> f64 {
        self.eps(i) - self.eps(i + 1)
    }

    /// Radius of the frozen ball on annulus `i`.
    pub fn radius(&self, i: usize) -> f64 {
        self.k * self.annulus_mid(i)
    }

    pub fn annulus_of(&self, x: &DVector<f64>) -> Result<usize> {
        check_dim(self.dim(), x.len())?;
        let r = (x - &self.center).norm();
        if r == 0.0 {
            return Err(Error::DegenerateMap);
        }
        if r > self.eps0 {
            return Err(Error::invalid(format!(
                "point at distance {r} lies outside the outermost annulus {}",
                self.eps0
            )));
        }
        let mut i = ((r / self.eps0).ln() / self.rho.ln()).floor().max(0.0) as usize;
        while r <= self.eps(i + 1) {
            i += 1;
        }
        while i > 0 && r > self.eps(i) {
            i -= 1;
        }
        Ok(i)
    }

    pub fn frozen_radius(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.radius(self.annulus_of(x)?))
    }
}

/// `φ_D(x)`: Monte Carlo mean of `f(x + y)` over `y` uniform in `D(x)`, with
/// antithetic pairs `±y`.
pub fn phi_smooth_estimate<F: Objective + ?Sized>(
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
        let y = in_ball(rng, n, r);
        out[0] = 0.5 * (f.value(&(x + &y)) + f.value(&(x - &y)));
    });
    Ok(est[0])
}

pub fn phi_smooth<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    map: &BallMapFamily,
    mc: usize,
    seed: u64,
) -> Result<f64> {
    phi_smooth_estimate(f, x, map, mc, seed).map(|e| e.mean)
}

/// Central-difference gradient of `φ_D` at `x` with step `h`. Every stencil
/// point reuses the same ball samples.
pub fn phi_gradient<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    map: &BallMapFamily,
    h: f64,
    mc: usize,
    seed: u64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_dim(f.dim(), x.len())?;
    let i = map.annulus_of(x)?;
    let n = x.len();
    for j in 0..n {
        for s in [-1.0, 1.0] {
            let mut p = x.clone();
            p[j] += s * h;
            if map.annulus_of(&p)? != i {
                return Err(Error::invalid("finite-difference stencil leaves the constancy annulus"));
            }
        }
    }
    let r = map.radius(i);
    let est = mc_means(mc.div_ceil(2), n, seed, |rng, out| {
        let y = in_ball(rng, n, r);
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for y in [&y, &(-&y)] {
                let mut p = x + y;
                p[j] += h;
                let up = f.value(&p);
                p[j] -= 2.0 * h;
                acc += up - f.value(&p);
            }
            *o = acc / (4.0 * h);
        }
    });
    Ok((
        DVector::from_iterator(n, est.iter().map(|e| e.mean)),
        DVector::from_iterator(n, est.iter().map(|e| e.std_err)),
    ))
}

#[derive(Clone, Debug)]
pub struct PhiConfig {
    /// Empty means [`BallMapFamily::default_family`].
    pub family: Vec<BallMapFamily>,
    /// Annulus indices whose midpoints are sampled.
    pub annuli: Vec<usize>,
    /// Unit directions from `x₀` to the sample points; empty selects a
    /// small default set.
    pub point_dirs: Vec<DVector<f64>>,
    /// Difference step as a fraction of the annulus width.
    pub fd_rel: f64,
    pub mc: usize,
    pub seed: u64,
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self {
            family: Vec::new(),
            annuli: vec![40, 60, 80],
            point_dirs: Vec::new(),
            fd_rel: 1e-4,
            mc: 100_000,
            seed: 0xF1,
        }
    }
}

pub(crate) fn default_point_dirs(dim: usize) -> Vec<DVector<f64>> {
    match dim {
        1 => vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        2 => circle_grid(16, 0.1),
        3 => fibonacci_sphere(26),
        d => (0..d)
            .flat_map(|j| {
                [1.0, -1.0].map(|s| {
                    let mut e = DVector::zeros(d);
                    e[j] = s;
                    e
                })
            })
            .collect(),
    }
}

/// One smoothed-gradient sample of [`estimate_phi`].
#[derive(Clone, Debug)]
pub struct PhiSample {
    pub point: DVector<f64>,
    pub k: f64,
    pub annulus: usize,
    pub gradient: DVector<f64>,
    pub std_err: DVector<f64>,
}

#[derive(Clone, Debug)]
pub struct PhiEstimate {
    pub set: Polytope,
    pub samples: Vec<PhiSample>,
    pub max_std_err: f64,
}

/// `Φf(x₀)`: hull of smoothed gradients at annulus midpoints over the family.
pub fn estimate_phi<F: Objective + ?Sized>(f: &F, x0: &DVector<f64>, cfg: &PhiConfig) -> Result<PhiEstimate> {
    check_dim(f.dim(), x0.len())?;
    let family = if cfg.family.is_empty() {
        BallMapFamily::default_family(x0)
    } else {
        cfg.family.clone()
    };
    let dirs = if cfg.point_dirs.is_empty() {
        default_point_dirs(x0.len())
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
    let samples: Vec<PhiSample> = tasks
        .par_iter()
        .map(|(a, i, d, x)| {
            let map = &family[*a];
            let h = cfg.fd_rel * map.annulus_width(*i);
            let seed = path_seed(cfg.seed, &[*a as u64, *i as u64, *d as u64]);
            let (gradient, std_err) = phi_gradient(f, x, map, h, cfg.mc, seed)?;
            Ok(PhiSample {
                point: x.clone(),
                k: map.k,
                annulus: *i,
                gradient,
                std_err,
            })
        })
        .collect::<Result<_>>()?;
    let max_std_err = samples.iter().map(|s| s.std_err.amax()).fold(0.0, f64::max);
    let set = Polytope::new(samples.iter().map(|s| s.gradient.clone()).collect())?;
    Ok(PhiEstimate {
        set,
        samples,
        max_std_err,
    })
}
