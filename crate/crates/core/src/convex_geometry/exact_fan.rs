//! Exact Demyanov difference in one and two dimensions.
//!
//! Enumerates the cells of the common refinement of both normal fans
//! directly: in the plane every fan boundary is a direction orthogonal to a
//! difference of two vertices of the same set, so sorting all such critical
//! angles and probing the midpoint of every gap visits every open cell. No
//! sampling is involved; the harness and the tests use this as the reference
//! for the sampled routine.

use nalgebra::DVector;

use super::polytope::Polytope;
use crate::error::{check_dim, Error, Result};

fn unique_argmax(p: &Polytope, q: &DVector<f64>) -> Option<usize> {
    let dots: Vec<f64> = p.vertices().iter().map(|v| v.dot(q)).collect();
    let best = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<usize> = dots
        .iter()
        .enumerate()
        .filter(|(_, &d)| best - d <= 1e-12 * best.abs().max(1.0))
        .map(|(i, _)| i)
        .collect();
    (winners.len() == 1).then(|| winners[0])
}

/// The cell directions of the common refinement of the normal fans of `a`
/// and `b` (one interior direction per open cell).
pub fn cell_directions(a: &Polytope, b: &Polytope) -> Result<Vec<DVector<f64>>> {
    check_dim(a.dim(), b.dim())?;
    match a.dim() {
        1 => Ok(vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)]),
        2 => {
            use std::f64::consts::{FRAC_PI_2, PI, TAU};
            let mut angles = Vec::new();
            for set in [a, b] {
                let vs = set.vertices();
                for i in 0..vs.len() {
                    for j in (i + 1)..vs.len() {
                        let d = &vs[j] - &vs[i];
                        let t = d[1].atan2(d[0]);
                        angles.push((t + FRAC_PI_2).rem_euclid(TAU));
                        angles.push((t - FRAC_PI_2).rem_euclid(TAU));
                    }
                }
            }
            angles.sort_by(f64::total_cmp);
            angles.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
            if angles.is_empty() {
                // both sets are single points: one cell, the whole circle
                angles.push(0.0);
            }
            let n = angles.len();
            let mut dirs = Vec::with_capacity(n);
            for k in 0..n {
                let lo = angles[k];
                let hi = if k + 1 < n { angles[k + 1] } else { angles[0] + TAU };
                let mid = if n == 1 { lo + PI } else { 0.5 * (lo + hi) };
                dirs.push(DVector::from_vec(vec![mid.cos(), mid.sin()]));
            }
            Ok(dirs)
        }
        d => Err(Error::invalid(format!(
            "exact normal-fan enumeration supports dimensions 1 and 2, got {d}"
        ))),
    }
}

/// Exact `A ⇀ B` for `d ≤ 2`.
pub fn exact_demyanov_difference(a: &Polytope, b: &Polytope) -> Result<Polytope> {
    let mut diffs = Vec::new();
    for q in cell_directions(a, b)? {
        if let (Some(i), Some(j)) = (unique_argmax(a, &q), unique_argmax(b, &q)) {
            diffs.push(&a.vertices()[i] - &b.vertices()[j]);
        }
    }
    if diffs.is_empty() {
        return Err(Error::DegenerateInput("no open cell found".into()));
    }
    Polytope::new(diffs)
}
