//! Sampled Demyanov difference.
//!
//! `A ⇀ B` is the closed convex hull of `∇p_A(q) − ∇p_B(q)` over unit
//! directions `q` where both support functions are differentiable. For
//! polytopes the gradient pair is constant on the open cells of the common
//! refinement of the two normal fans, so the difference is a finite hull of
//! vertex differences. We sample random directions, drop ties, and then
//! refine: whenever two neighbouring samples land in different cells the
//! great-circle arc between them is bisected. Cells meet an arc in intervals,
//! so bisection finds every cell the arc crosses that is wider than the
//! resolution. In the plane, adjacent samples in angular order cover the whole
//! circle, which makes the result exact.

use std::collections::BTreeSet;

use nalgebra::DVector;
use rand::Rng;

use super::polytope::{Polytope, GEOMETRY_TOL};
use crate::error::{check_dim, Error, Result};
use crate::rng::{stream, unit_vector};

/// Direction-sampling settings for [`demyanov_difference`].
#[derive(Clone, Debug)]
pub struct DirectionSampler {
    /// Number of random directions; `None` means `10·d·(|A|+|B|)`.
    pub directions: Option<usize>,
    pub seed: u64,
    pub tie_tol: f64,
    /// Bisect arcs between neighbouring samples with different cells.
    pub refine: bool,
    /// Arcs shorter than this (radians) are not split further.
    pub min_arc: f64,
    /// Fresh sample sets tried before giving up on finding smooth directions.
    pub retries: usize,
}

impl Default for DirectionSampler {
    fn default() -> Self {
        Self {
            directions: None,
            seed: 0x5EED,
            tie_tol: GEOMETRY_TOL,
            refine: true,
            min_arc: 1e-10,
            retries: 3,
        }
    }
}

impl DirectionSampler {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

type Cell = (usize, usize);

struct Labeller<'a> {
    a: &'a Polytope,
    b: &'a Polytope,
    tie_tol: f64,
}

impl Labeller<'_> {
    fn label(&self, q: &DVector<f64>) -> Option<Cell> {
        let ia = self.a.support_with_tol(q, self.tie_tol).ok()?.unique()?;
        let ib = self.b.support_with_tol(q, self.tie_tol).ok()?.unique()?;
        Some((ia, ib))
    }
}

/// `A ⇀ B` for polytopes of equal dimension.
pub fn demyanov_difference(a: &Polytope, b: &Polytope, sampler: &DirectionSampler) -> Result<Polytope> {
    check_dim(a.dim(), b.dim())?;
    let dim = a.dim();
    let lab = Labeller {
        a,
        b,
        tie_tol: sampler.tie_tol,
    };

    let mut cells: BTreeSet<Cell> = BTreeSet::new();
    if dim == 1 {
        for s in [1.0, -1.0] {
            if let Some(c) = lab.label(&DVector::from_element(1, s)) {
                cells.insert(c);
            }
        }
    } else {
        let count = sampler
            .directions
            .unwrap_or(10 * dim * (a.len() + b.len()))
            .max(2 * dim + 2);
        for attempt in 0..=sampler.retries {
            let mut rng = stream(crate::rng::child_seed(sampler.seed, attempt as u64));
            let mut dirs: Vec<DVector<f64>> = (0..count).map(|_| unit_vector(&mut rng, dim)).collect();
            if dim == 2 {
                // keeps every angular gap below pi so neighbour arcs are the short ones
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                dirs.extend((0..8).map(|k| {
                    let t = phase + std::f64::consts::TAU * k as f64 / 8.0;
                    DVector::from_vec(vec![t.cos(), t.sin()])
                }));
            }
            let samples: Vec<(DVector<f64>, Cell)> = dirs
                .into_iter()
                .filter_map(|q| lab.label(&q).map(|c| (q, c)))
                .collect();
            cells.extend(samples.iter().map(|(_, c)| *c));
            if sampler.refine && samples.len() >= 2 {
                for (i, j) in neighbour_pairs(&samples, dim) {
                    bisect(&lab, &samples[i], &samples[j], sampler.min_arc, &mut rng, &mut cells, 0);
                }
            }
            if !cells.is_empty() {
                break;
            }
        }
    }

    if cells.is_empty() {
        return Err(Error::DegenerateInput(
            "no direction with unique maximizers in both sets".into(),
        ));
    }
    let diffs = cells
        .iter()
        .map(|&(ia, ib)| &a.vertices()[ia] - &b.vertices()[ib])
        .collect();
    Polytope::new(diffs)
}

fn neighbour_pairs(samples: &[(DVector<f64>, Cell)], dim: usize) -> Vec<(usize, usize)> {
    let n = samples.len();
    let mut pairs = Vec::new();
    if dim == 2 {
        let mut order: Vec<usize> = (0..n).collect();
        let angle = |i: usize| samples[i].0[1].atan2(samples[i].0[0]);
        order.sort_by(|&x, &y| angle(x).total_cmp(&angle(y)));
        for k in 0..n {
            let (i, j) = (order[k], order[(k + 1) % n]);
            if samples[i].1 != samples[j].1 {
                pairs.push((i, j));
            }
        }
    } else {
        let k = (2 * dim).min(n - 1);
        for i in 0..n {
            let mut near: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (-samples[i].0.dot(&samples[j].0), j))
                .collect();
            near.sort_by(|x, y| x.0.total_cmp(&y.0));
            for &(_, j) in near.iter().take(k) {
                if i < j && samples[i].1 != samples[j].1 {
                    pairs.push((i, j));
                }
            }
        }
    }
    pairs
}

#[allow(clippy::too_many_arguments)]
fn bisect<R: Rng>(
    lab: &Labeller<'_>,
    left: &(DVector<f64>, Cell),
    right: &(DVector<f64>, Cell),
    min_arc: f64,
    rng: &mut R,
    cells: &mut BTreeSet<Cell>,
    depth: usize,
) {
    if left.1 == right.1 || depth > 80 {
        return;
    }
    let cos = left.0.dot(&right.0).clamp(-1.0, 1.0);
    let arc = cos.acos();
    if arc < min_arc {
        return;
    }
    let mut mid = &left.0 + &right.0;
    if mid.norm() < 1e-12 {
        // antipodal endpoints: any perpendicular direction splits the arc
        let r = unit_vector(rng, left.0.len());
        mid = &r - &left.0 * left.0.dot(&r);
    }
    mid /= mid.norm();
    let mut label = lab.label(&mid);
    if label.is_none() {
        // tie at the midpoint; nudge along the arc
        for _ in 0..3 {
            let t: f64 = rng.random_range(0.3..0.7);
            let mut m = &left.0 * (1.0 - t) + &right.0 * t;
            m /= m.norm();
            if let Some(c) = lab.label(&m) {
                mid = m;
                label = Some(c);
                break;
            }
        }
    }
    let Some(c) = label else { return };
    cells.insert(c);
    let m = (mid, c);
    bisect(lab, left, &m, min_arc, rng, cells, depth + 1);
    bisect(lab, &m, right, min_arc, rng, cells, depth + 1);
}
