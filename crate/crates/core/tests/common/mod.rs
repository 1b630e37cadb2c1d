//! Test-side oracles, written without the library's geometry code.
#![allow(dead_code)]

use std::f64::consts::PI;

use codiff::convex_geometry::Polytope;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn v(c: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(c)
}

pub fn random_points(rng: &mut impl Rng, dim: usize, max_points: usize) -> Vec<DVector<f64>> {
    let count = rng.random_range(1..=max_points);
    (0..count)
        .map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0)))
        .collect()
}

fn argmax(points: &[DVector<f64>], q: &DVector<f64>) -> DVector<f64> {
    points
        .iter()
        .max_by(|a, b| a.dot(q).total_cmp(&b.dot(q)))
        .expect("nonempty")
        .clone()
}

/// `A ⇀ B` from the definition. Every direction where a support function of
/// the raw point lists is nondifferentiable is orthogonal to some pairwise
/// difference; between consecutive such directions both argmaxes are fixed,
/// so one probe per open arc finds every difference of gradients.
pub fn brute_demyanov(a: &[DVector<f64>], b: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let dim = a[0].len();
    match dim {
        1 => [1.0, -1.0]
            .iter()
            .map(|&s| {
                let q = v(&[s]);
                argmax(a, &q) - argmax(b, &q)
            })
            .collect(),
        2 => {
            let mut angles = vec![0.0, PI];
            for pts in [a, b] {
                for p in pts {
                    for r in pts {
                        let d = p - r;
                        if d.norm() > 1e-12 {
                            let t = d[1].atan2(d[0]) + PI / 2.0;
                            angles.push(t.rem_euclid(2.0 * PI));
                            angles.push((t + PI).rem_euclid(2.0 * PI));
                        }
                    }
                }
            }
            angles.sort_by(f64::total_cmp);
            angles.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
            let mut out = Vec::new();
            for (i, &t0) in angles.iter().enumerate() {
                let t1 = if i + 1 < angles.len() { angles[i + 1] } else { angles[0] + 2.0 * PI };
                if t1 - t0 < 1e-12 {
                    continue;
                }
                let t = 0.5 * (t0 + t1);
                let q = v(&[t.cos(), t.sin()]);
                out.push(argmax(a, &q) - argmax(b, &q));
            }
            out
        }
        _ => panic!("oracle covers dimensions 1 and 2"),
    }
}

pub fn brute_demyanov_polytope(a: &[DVector<f64>], b: &[DVector<f64>]) -> Polytope {
    Polytope::new(brute_demyanov(a, b)).expect("nonempty")
}

/// Hausdorff distance between hulls of point lists in the plane or on the
/// line, by projection onto segments.
pub fn hull_hausdorff(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let one_way = |p: &[DVector<f64>], q: &[DVector<f64>]| {
        p.iter().map(|x| dist_to_hull(x, q)).fold(0.0_f64, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

fn dist_to_hull(x: &DVector<f64>, pts: &[DVector<f64>]) -> f64 {
    if pts[0].len() == 1 {
        let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        return (lo - x[0]).max(x[0] - hi).max(0.0);
    }
    if inside_hull_2d(x, pts) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for p in pts {
        for q in pts {
            best = best.min(dist_to_segment(x, p, q));
        }
    }
    best
}

fn dist_to_segment(x: &DVector<f64>, p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    let d = q - p;
    let len2 = d.norm_squared();
    let t = if len2 > 0.0 { ((x - p).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (x - (p + d * t)).norm()
}

/// Carathéodory in the plane: inside the hull means inside some triangle
/// of the points.
fn inside_hull_2d(x: &DVector<f64>, pts: &[DVector<f64>]) -> bool {
    let cross = |a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate().skip(i + 1) {
            for c in pts.iter().skip(j + 1) {
                let area = cross(a, b, c);
                if area.abs() < 1e-14 {
                    continue;
                }
                let s = [cross(a, b, x), cross(b, c, x), cross(c, a, x)];
                if s.iter().all(|&t| t * area.signum() >= -1e-14) {
                    return true;
                }
            }
        }
    }
    false
}
