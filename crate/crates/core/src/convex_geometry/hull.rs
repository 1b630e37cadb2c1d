//! Nearest points in convex hulls and extreme-point filtering.
//!
//! `nearest_in_hull` is Wolfe's minimum-norm-point algorithm applied to the
//! translated point set. It is exact up to rounding: the active "corral" is an
//! affinely independent subset whose affine minimizer lies in its relative
//! interior. `extreme_points` uses it as a membership oracle inside Clarkson's
//! output-sensitive scheme, so the cost grows with the number of vertices, not
//! with the square of the input size.

use nalgebra::{DMatrix, DVector};

const MAX_MAJOR: usize = 500;
const MAX_MINOR: usize = 500;

/// Nearest point of `conv(points)` to `target`, with its distance.
pub fn nearest_in_hull(target: &DVector<f64>, points: &[DVector<f64>]) -> (DVector<f64>, f64) {
    assert!(!points.is_empty(), "hull of an empty set");
    let shifted: Vec<DVector<f64>> = points.iter().map(|p| p - target).collect();
    let x = min_norm_point(&shifted);
    let d = x.norm();
    (x + target, d)
}

/// Euclidean distance from `target` to `conv(points)`.
pub fn distance_to_hull(target: &DVector<f64>, points: &[DVector<f64>]) -> f64 {
    nearest_in_hull(target, points).1
}

fn min_norm_point(ys: &[DVector<f64>]) -> DVector<f64> {
    let scale = ys.iter().map(|y| y.norm_squared()).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return ys[0].clone();
    }
    let eps_major = 1e-14 * scale;
    let eps_weight = 1e-13;

    let start = argmin_by(ys.iter().map(|y| y.norm_squared()));
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = ys[start].clone();

    for _ in 0..MAX_MAJOR {
        let j = argmin_by(ys.iter().map(|y| x.dot(y)));
        if x.norm_squared() - x.dot(&ys[j]) <= eps_major || corral.contains(&j) {
            break;
        }
        corral.push(j);
        weights.push(0.0);

        for _ in 0..MAX_MINOR {
            let Some(alpha) = affine_minimizer(ys, &corral) else {
                // Numerically dependent corral: drop the newest point.
                corral.pop();
                weights.pop();
                break;
            };
            if alpha.iter().all(|&a| a > eps_weight) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (lam, a) in weights.iter().zip(&alpha) {
                if *a <= eps_weight {
                    let denom = lam - a;
                    if denom > 0.0 {
                        theta = theta.min(lam / denom);
                    }
                }
            }
            for (lam, a) in weights.iter_mut().zip(&alpha) {
                *lam = theta * a + (1.0 - theta) * *lam;
            }
            let mut k = 0;
            let mut removed = false;
            while k < corral.len() {
                if weights[k] <= eps_weight {
                    corral.remove(k);
                    weights.remove(k);
                    removed = true;
                } else {
                    k += 1;
                }
            }
            if !removed {
                // theta hit a weight exactly; drop the smallest one to make progress
                let m = argmin_by(weights.iter().copied());
                corral.remove(m);
                weights.remove(m);
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
        }
        x = combine(ys, &corral, &weights);
    }
    x
}

fn combine(ys: &[DVector<f64>], corral: &[usize], weights: &[f64]) -> DVector<f64> {
    let mut x = DVector::zeros(ys[0].len());
    for (&i, &w) in corral.iter().zip(weights) {
        x.axpy(w, &ys[i], 1.0);
    }
    x
}

/// Minimizer of `|sum a_i y_i|` subject to `sum a_i = 1` over the corral.
fn affine_minimizer(ys: &[DVector<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in a..k {
            let g = ys[corral[a]].dot(&ys[corral[b]]);
            kkt[(a, b)] = g;
            kkt[(b, a)] = g;
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    let alpha: Vec<f64> = sol.iter().take(k).copied().collect();
    if alpha.iter().any(|a| !a.is_finite()) {
        return None;
    }
    Some(alpha)
}

fn argmin_by(values: impl Iterator<Item = f64>) -> usize {
    let mut best = f64::INFINITY;
    let mut idx = 0;
    for (i, v) in values.enumerate() {
        if v < best {
            best = v;
            idx = i;
        }
    }
    idx
}

/// Removes points closer than `tol` to an earlier kept point.
pub fn dedup_points(points: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]));
    let mut kept: Vec<DVector<f64>> = Vec::new();
    for i in order {
        let p = &points[i];
        // sorted by first coordinate: only a trailing window can be within tol
        let dup = kept
            .iter()
            .rev()
            .take_while(|k| p[0] - k[0] <= tol)
            .any(|k| (k - p).norm() <= tol);
        if !dup {
            kept.push(p.clone());
        }
    }
    kept
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// The vertices of `conv(points)`: no returned point lies within `tol` of the
/// hull of the others. Output order is deterministic for a given input.
pub fn extreme_points(points: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let pts = dedup_points(points, tol);
    if pts.len() <= 1 {
        return pts;
    }
    if pts[0].len() == 1 {
        // `pts` is sorted ascending after dedup
        return vec![pts[0].clone(), pts[pts.len() - 1].clone()];
    }

    let mut hull: Vec<usize> = vec![0];
    let mut in_hull = vec![false; pts.len()];
    in_hull[0] = true;
    for i in 0..pts.len() {
        if in_hull[i] {
            continue;
        }
        loop {
            let current: Vec<DVector<f64>> = hull.iter().map(|&k| pts[k].clone()).collect();
            let (nearest, dist) = nearest_in_hull(&pts[i], &current);
            if dist <= tol {
                break;
            }
            let dir = &pts[i] - nearest;
            let j = farthest_along(&pts, &dir);
            if in_hull[j] {
                hull.push(i);
                in_hull[i] = true;
                break;
            }
            hull.push(j);
            in_hull[j] = true;
            if j == i {
                break;
            }
        }
    }

    // Points picked from the interior of a face are removed here.
    let mut verts: Vec<DVector<f64>> = hull.iter().map(|&k| pts[k].clone()).collect();
    let mut k = 0;
    while k < verts.len() && verts.len() > 1 {
        let others: Vec<DVector<f64>> = verts
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != k)
            .map(|(_, v)| v.clone())
            .collect();
        if distance_to_hull(&verts[k], &others) <= tol {
            verts.remove(k);
        } else {
            k += 1;
        }
    }
    verts.sort_by(lex_cmp);
    verts
}

fn farthest_along(pts: &[DVector<f64>], dir: &DVector<f64>) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut idx = 0;
    for (i, p) in pts.iter().enumerate() {
        let v = dir.dot(p);
        if v > best {
            best = v;
            idx = i;
        }
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn distance_to_segment() {
        let pts = [v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let d = distance_to_hull(&v(&[1.0, 1.0]), &pts);
        assert!((d - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!(distance_to_hull(&v(&[0.5, 0.5]), &pts) < 1e-12);
    }

    #[test]
    fn distance_to_square_from_corner_region() {
        let sq = [
            v(&[0.0, 0.0]),
            v(&[1.0, 0.0]),
            v(&[0.0, 1.0]),
            v(&[1.0, 1.0]),
        ];
        assert!((distance_to_hull(&v(&[2.0, 2.0]), &sq) - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!((distance_to_hull(&v(&[0.5, 3.0]), &sq) - 2.0).abs() < 1e-12);
        assert!(distance_to_hull(&v(&[0.3, 0.6]), &sq) < 1e-12);
    }

    #[test]
    fn origin_on_affine_hull() {
        // The Gram matrix of these is singular; the KKT system is not.
        let pts = [v(&[-1.0]), v(&[1.0])];
        assert!(distance_to_hull(&v(&[0.0]), &pts) < 1e-14);
        assert!((distance_to_hull(&v(&[2.0]), &pts) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extreme_points_drop_interior_and_edge_points() {
        let pts = vec![
            v(&[0.0, 0.0]),
            v(&[2.0, 0.0]),
            v(&[0.0, 2.0]),
            v(&[2.0, 2.0]),
            v(&[1.0, 1.0]),
            v(&[1.0, 0.0]),
            v(&[2.0, 2.0 + 1e-12]),
        ];
        let ext = extreme_points(&pts, 1e-9);
        assert_eq!(ext.len(), 4);
    }

    #[test]
    fn extreme_points_in_3d() {
        let mut pts = Vec::new();
        for &x in &[0.0, 1.0] {
            for &y in &[0.0, 1.0] {
                for &z in &[0.0, 1.0] {
                    pts.push(v(&[x, y, z]));
                }
            }
        }
        pts.push(v(&[0.5, 0.5, 0.5]));
        pts.push(v(&[0.5, 0.5, 1.0]));
        assert_eq!(extreme_points(&pts, 1e-9).len(), 8);
    }
}
