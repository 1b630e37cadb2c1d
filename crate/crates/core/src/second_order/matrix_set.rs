use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::convex_geometry::{demyanov_difference, hausdorff_distance, minkowski_sum, DirectionSampler, Polytope};
use crate::error::{check_dim, Error, Result};

/// `n(n+1)/2`.
pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Diagonal first, then the upper off-diagonal entries row by row, each
/// scaled by `√2` so that the Euclidean norm equals the Frobenius norm.
pub fn flatten_sym(a: &DMatrix<f64>) -> DVector<f64> {
    let n = a.nrows();
    let mut out = DVector::zeros(sym_dim(n));
    for i in 0..n {
        out[i] = a[(i, i)];
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            out[k] = 0.5 * (a[(i, j)] + a[(j, i)]) * std::f64::consts::SQRT_2;
            k += 1;
        }
    }
    out
}

pub fn unflatten_sym(v: &DVector<f64>, n: usize) -> Result<DMatrix<f64>> {
    check_dim(sym_dim(n), v.len())?;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = v[i];
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let c = v[k] / std::f64::consts::SQRT_2;
            a[(i, j)] = c;
            a[(j, i)] = c;
            k += 1;
        }
    }
    Ok(a)
}

/// Convex hull of finitely many symmetric `n × n` matrices, stored in
/// flattened coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSet {
    n: usize,
    set: Polytope,
}

impl MatrixSet {
    pub fn new(mats: &[DMatrix<f64>]) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::invalid("matrix set must be nonempty"))?;
        let n = first.nrows();
        let mut pts = Vec::with_capacity(mats.len());
        for a in mats {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.nrows().max(a.ncols()),
                });
            }
            let asym = (a - a.transpose()).amax();
            if asym > 1e-9 * a.amax().max(1.0) {
                return Err(Error::invalid(format!("matrix is not symmetric (asymmetry {asym:e})")));
            }
            pts.push(flatten_sym(a));
        }
        Ok(Self {
            n,
            set: Polytope::new(pts)?,
        })
    }

    pub fn from_polytope(n: usize, set: Polytope) -> Result<Self> {
        check_dim(sym_dim(n), set.dim())?;
        Ok(Self { n, set })
    }

    pub fn singleton(a: &DMatrix<f64>) -> Result<Self> {
        Self::new(std::slice::from_ref(a))
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            set: Polytope::origin(sym_dim(n)),
        }
    }

    /// A regular simplex inscribed in the unit Frobenius ball, centred at 0.
    pub fn inscribed_simplex(n: usize) -> Result<Self> {
        let m = sym_dim(n);
        if m == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        // e_1..e_m and c·(1..1) form a regular simplex for this c
        let c = (1.0 - ((m + 1) as f64).sqrt()) / m as f64;
        let mut pts: Vec<DVector<f64>> = (0..m)
            .map(|i| {
                let mut e = DVector::zeros(m);
                e[i] = 1.0;
                e
            })
            .collect();
        pts.push(DVector::from_element(m, c));
        let centre = pts.iter().fold(DVector::zeros(m), |acc, p| acc + p) / (m + 1) as f64;
        let pts: Vec<DVector<f64>> = pts
            .into_iter()
            .map(|p| {
                let d = p - &centre;
                let norm = d.norm();
                d / norm
            })
            .collect();
        Self::from_polytope(n, Polytope::new(pts)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_polytope(&self) -> &Polytope {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn matrices(&self) -> Vec<DMatrix<f64>> {
        self.set
            .vertices()
            .iter()
            .map(|v| unflatten_sym(v, self.n).expect("stored dimension"))
            .collect()
    }

    /// `max ½(Aq, q)` over the set.
    pub fn quad_max(&self, q: &DVector<f64>) -> f64 {
        self.quad_values(q).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min ½(Aq, q)` over the set.
    pub fn quad_min(&self, q: &DVector<f64>) -> f64 {
        self.quad_values(q).fold(f64::INFINITY, f64::min)
    }

    fn quad_values<'a>(&'a self, q: &DVector<f64>) -> impl Iterator<Item = f64> + 'a {
        let qq = flatten_sym(&(q * q.transpose()));
        self.set.vertices().iter().map(move |a| 0.5 * a.dot(&qq))
    }

    pub fn negate(&self) -> Self {
        Self {
            n: self.n,
            set: self.set.negate(),
        }
    }

    pub fn to_doc(&self) -> MatrixSetDoc {
        MatrixSetDoc {
            n: self.n,
            sym_dim: sym_dim(self.n),
            vertices: self.set.to_rows(),
        }
    }
}

/// Wire form in flattened coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixSetDoc {
    pub n: usize,
    pub sym_dim: usize,
    pub vertices: Vec<Vec<f64>>,
}

impl MatrixSetDoc {
    pub fn to_set(&self) -> Result<MatrixSet> {
        check_dim(sym_dim(self.n), self.sym_dim)?;
        MatrixSet::from_polytope(self.n, Polytope::from_rows(&self.vertices)?)
    }
}

/// Frobenius-Hausdorff distance.
pub fn matrix_hausdorff(a: &MatrixSet, b: &MatrixSet) -> Result<f64> {
    check_dim(a.n, b.n)?;
    hausdorff_distance(&a.set, &b.set)
}

pub fn matrix_minkowski_sum(a: &MatrixSet, b: &MatrixSet) -> Result<MatrixSet> {
    check_dim(a.n, b.n)?;
    MatrixSet::from_polytope(a.n, minkowski_sum(&a.set, &b.set)?)
}

pub fn matrix_demyanov_difference(a: &MatrixSet, b: &MatrixSet, sampler: &DirectionSampler) -> Result<MatrixSet> {
    check_dim(a.n, b.n)?;
    MatrixSet::from_polytope(a.n, demyanov_difference(&a.set, &b.set, sampler)?)
}

/// `(Ψ + (−ℬ), ℬ)`: the matrix pair whose difference `𝒜 ⇀ (−ℬ)` is `Ψ`.
pub fn recover_matrix_pair(psi2: &MatrixSet, b: &MatrixSet) -> Result<(MatrixSet, MatrixSet)> {
    Ok((matrix_minkowski_sum(psi2, &b.negate())?, b.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattening_is_an_isometry() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, -1.0, 2.0, 0.5, 3.0, -1.0, 3.0, 4.0]);
        let f = flatten_sym(&a);
        assert!((f.norm() - a.norm()).abs() < 1e-12);
        assert_eq!(unflatten_sym(&f, 3).unwrap(), a);
    }

    #[test]
    fn simplex_is_inscribed() {
        for n in 1..=3 {
            let s = MatrixSet::inscribed_simplex(n).unwrap();
            assert_eq!(s.len(), sym_dim(n) + 1);
            for a in s.as_polytope().vertices() {
                assert!((a.norm() - 1.0).abs() < 1e-12);
            }
            assert!(s.as_polytope().centroid().norm() < 1e-12);
        }
    }

    #[test]
    fn scalar_difference() {
        let s = DirectionSampler::default();
        let one = |x: f64| DMatrix::from_element(1, 1, x);
        let a = MatrixSet::new(&[one(0.0), one(2.0)]).unwrap();
        let b = MatrixSet::new(&[one(0.0), one(1.0)]).unwrap();
        let d = matrix_demyanov_difference(&a, &b, &s).unwrap();
        let want = MatrixSet::new(&[one(0.0), one(1.0)]).unwrap();
        assert!(matrix_hausdorff(&d, &want).unwrap() < 1e-12);
        let z = matrix_demyanov_difference(&a, &a, &s).unwrap();
        assert!(matrix_hausdorff(&z, &MatrixSet::zero(1)).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(MatrixSet::new(&[a]).is_err());
    }
}
