//! Convex compact sets as polytopes: support functions, Minkowski sums, the
//! Hausdorff metric and the Demyanov difference.

mod demyanov;
pub mod exact_fan;
pub mod hull;
mod polytope;

use nalgebra::DVector;

pub use demyanov::{demyanov_difference, DirectionSampler};
pub use polytope::{Polytope, PolytopeDoc, SetPair, Support, GEOMETRY_TOL};

use crate::error::{check_dim, Result};

/// Support function of `p` at `q`.
pub fn support(p: &Polytope, q: &DVector<f64>) -> Result<Support> {
    p.support(q)
}

/// Hausdorff distance between the hulls of `a` and `b`.
///
/// The distance to a convex set is convex, so each one-sided deviation is
/// attained at a vertex.
pub fn hausdorff_distance(a: &Polytope, b: &Polytope) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let one_sided = |x: &Polytope, y: &Polytope| {
        x.vertices()
            .iter()
            .map(|v| y.distance_to(v))
            .fold(0.0_f64, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

/// Distance from a point to the hull of `a`.
pub fn point_to_hull_distance(v: &DVector<f64>, a: &Polytope) -> Result<f64> {
    check_dim(a.dim(), v.len())?;
    Ok(a.distance_to(v))
}

pub fn minkowski_sum(a: &Polytope, b: &Polytope) -> Result<Polytope> {
    check_dim(a.dim(), b.dim())?;
    let mut sums = Vec::with_capacity(a.len() * b.len());
    for u in a.vertices() {
        for w in b.vertices() {
            sums.push(u + w);
        }
    }
    Polytope::new(sums)
}

/// Two pairs are equivalent when their Demyanov differences coincide.
pub fn pairs_equivalent(p: &SetPair, q: &SetPair, tol: f64, sampler: &DirectionSampler) -> Result<bool> {
    check_dim(p.dim(), q.dim())?;
    let dp = demyanov_difference(&p.lower, &p.upper, sampler)?;
    let dq = demyanov_difference(&q.lower, &q.upper, sampler)?;
    Ok(hausdorff_distance(&dp, &dq)? <= tol)
}
