//! Seeded random test problems.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::convex_geometry::Polytope;
use crate::error::Result;
use crate::function_models::{ph2_from_matrix_set, MaxMinQuadModel};
use crate::rng::StreamRng;

fn uniform_point(rng: &mut StreamRng, dim: usize, half: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.random_range(-half..=half))
}

/// Hull of `1..=max_points` uniform points in `[−1, 1]^dim`.
pub fn random_polytope(rng: &mut StreamRng, dim: usize, max_points: usize) -> Result<Polytope> {
    let count = rng.random_range(1..=max_points.max(1));
    Polytope::new((0..count).map(|_| uniform_point(rng, dim, 1.0)).collect())
}

/// `count` slopes uniform in `[−1, 1]^dim`, at least `min_gap` apart.
pub fn random_slopes(rng: &mut StreamRng, dim: usize, count: usize, min_gap: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(count);
    while out.len() < count {
        let v = uniform_point(rng, dim, 1.0);
        if out.iter().all(|w| (w - &v).norm() >= min_gap) {
            out.push(v);
        }
    }
    out
}

/// `max_i (v_i, x)` with every piece active at the origin; returns the model
/// and its slopes.
pub fn random_max_affine(rng: &mut StreamRng, dim: usize) -> Result<(MaxMinQuadModel, Vec<DVector<f64>>)> {
    let count = rng.random_range(dim + 1..=6);
    let slopes = random_slopes(rng, dim, count, 0.2);
    Ok((MaxMinQuadModel::max_affine(DVector::zeros(dim), &slopes)?, slopes))
}

/// `max_i (v_i, x) + min_j (w_j, x)` with its two slope lists.
pub fn random_dc(
    rng: &mut StreamRng,
    dim: usize,
) -> Result<(MaxMinQuadModel, Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    let nv = rng.random_range(2..=4);
    let nw = rng.random_range(2..=3);
    let v = random_slopes(rng, dim, nv, 0.2);
    let w = random_slopes(rng, dim, nw, 0.2);
    Ok((MaxMinQuadModel::difference_of_convex(DVector::zeros(dim), &v, &w)?, v, w))
}

fn random_symmetric(rng: &mut StreamRng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..=2.0));
    (&m + m.transpose()) * 0.5
}

/// Two symmetric matrices whose difference is indefinite, so each one is the
/// active generator of `max ½(A_k q, q)` on an open cone of directions.
pub fn random_two_generators(rng: &mut StreamRng, n: usize) -> [DMatrix<f64>; 2] {
    loop {
        let a = random_symmetric(rng, n);
        let b = random_symmetric(rng, n);
        let eig = (&a - &b).symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        if lo < -0.2 && hi > 0.2 {
            return [a, b];
        }
    }
}

/// `max_i (v_i, Δ) + max_k ½(A_k Δ, Δ)` in the plane with its generators.
pub struct ComposedCase {
    pub model: MaxMinQuadModel,
    pub slopes: Vec<DVector<f64>>,
    pub matrices: Vec<DMatrix<f64>>,
}

pub fn random_composed(rng: &mut StreamRng) -> Result<ComposedCase> {
    let slopes = random_slopes(rng, 2, 3, 0.3);
    let matrices = random_two_generators(rng, 2).to_vec();
    let linear = MaxMinQuadModel::max_affine(DVector::zeros(2), &slopes)?;
    let model = linear.compose_sum(&ph2_from_matrix_set(&matrices)?)?;
    Ok(ComposedCase {
        model,
        slopes,
        matrices,
    })
}

/// `|Δ| + Δ²` on the real line.
pub fn abs_plus_square() -> Result<MaxMinQuadModel> {
    let sq = MaxMinQuadModel::quadratic(DVector::zeros(1), DVector::zeros(1), DMatrix::from_element(1, 1, 2.0))?;
    MaxMinQuadModel::abs_1d().compose_sum(&sq)
}

/// One-dimensional max-affine models with their slopes, `|·|` first.
pub fn one_dim_battery() -> Result<Vec<(MaxMinQuadModel, Vec<f64>)>> {
    let specs: [&[f64]; 4] = [&[-1.0, 1.0], &[-0.5, 1.0], &[-1.5, 0.5, 1.0], &[-1.0, -0.25, 0.75]];
    specs
        .iter()
        .map(|s| {
            let slopes: Vec<DVector<f64>> = s.iter().map(|&c| DVector::from_element(1, c)).collect();
            Ok((MaxMinQuadModel::max_affine(DVector::zeros(1), &slopes)?, s.to_vec()))
        })
        .collect()
}
