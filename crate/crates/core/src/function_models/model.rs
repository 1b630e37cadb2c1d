use nalgebra::{DMatrix, DVector};

use super::objective::Objective;
use crate::convex_geometry::{Polytope, SetPair};
use crate::error::{check_dim, Error, Result};

/// Default tie tolerance for active-piece detection, relative to the
/// largest piece value in magnitude.
pub const TIE_TOL: f64 = 1e-9;

/// `½(A + Aᵀ)`; leaves every quadratic form value unchanged.
pub fn symmetrize(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "cannot symmetrize a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok((a + a.transpose()) * 0.5)
}

/// One piece `a + (v, Δ) + ½(AΔ, Δ)` of a max/min model.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadPiece {
    pub offset: f64,
    pub linear: DVector<f64>,
    pub quadratic: DMatrix<f64>,
}

impl QuadPiece {
    pub fn new(offset: f64, linear: DVector<f64>, quadratic: DMatrix<f64>) -> Result<Self> {
        let n = linear.len();
        if quadratic.nrows() != n || quadratic.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: quadratic.nrows(),
            });
        }
        Ok(Self {
            offset,
            linear,
            quadratic: symmetrize(&quadratic)?,
        })
    }

    pub fn affine(offset: f64, linear: DVector<f64>) -> Self {
        let n = linear.len();
        Self {
            offset,
            linear,
            quadratic: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn value(&self, d: &DVector<f64>) -> f64 {
        self.offset + self.linear.dot(d) + 0.5 * d.dot(&(&self.quadratic * d))
    }

    pub fn gradient(&self, d: &DVector<f64>) -> DVector<f64> {
        &self.linear + &self.quadratic * d
    }

    fn sum(&self, other: &QuadPiece) -> QuadPiece {
        QuadPiece {
            offset: self.offset + other.offset,
            linear: &self.linear + &other.linear,
            quadratic: &self.quadratic + &other.quadratic,
        }
    }
}

/// `f(x₀+Δ) = f(x₀) + max_i [a_i + (v_i,Δ) + ½(A_iΔ,Δ)] + min_j [b_j + (w_j,Δ) + ½(B_jΔ,Δ)]`.
///
/// Offsets are normalized on construction so that `max a_i = 0` and
/// `min b_j = 0`; the shift is absorbed into `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxMinQuadModel {
    anchor: DVector<f64>,
    base: f64,
    hypo: Vec<QuadPiece>,
    hyper: Vec<QuadPiece>,
    tie_tol: f64,
}

impl MaxMinQuadModel {
    pub fn new(
        anchor: DVector<f64>,
        base: f64,
        mut hypo: Vec<QuadPiece>,
        mut hyper: Vec<QuadPiece>,
    ) -> Result<Self> {
        let n = anchor.len();
        if n == 0 {
            return Err(Error::invalid("model dimension must be positive"));
        }
        if hypo.is_empty() {
            return Err(Error::invalid("a model needs at least one hypo piece"));
        }
        for p in hypo.iter().chain(&hyper) {
            check_dim(n, p.dim())?;
        }
        let mut base = base;
        let top = hypo.iter().map(|p| p.offset).fold(f64::NEG_INFINITY, f64::max);
        hypo.iter_mut().for_each(|p| p.offset -= top);
        base += top;
        if !hyper.is_empty() {
            let bottom = hyper.iter().map(|p| p.offset).fold(f64::INFINITY, f64::min);
            hyper.iter_mut().for_each(|p| p.offset -= bottom);
            base += bottom;
        }
        Ok(Self {
            anchor,
            base,
            hypo,
            hyper,
            tie_tol: TIE_TOL,
        })
    }

    /// `max_i (v_i, x − x₀)`.
    pub fn max_affine(anchor: DVector<f64>, slopes: &[DVector<f64>]) -> Result<Self> {
        let pieces = slopes.iter().map(|v| QuadPiece::affine(0.0, v.clone())).collect();
        Self::new(anchor, 0.0, pieces, Vec::new())
    }

    /// `max_i (v_i, Δ) + min_j (w_j, Δ)`.
    pub fn difference_of_convex(
        anchor: DVector<f64>,
        maxima: &[DVector<f64>],
        minima: &[DVector<f64>],
    ) -> Result<Self> {
        let hypo = maxima.iter().map(|v| QuadPiece::affine(0.0, v.clone())).collect();
        let hyper = minima.iter().map(|w| QuadPiece::affine(0.0, w.clone())).collect();
        Self::new(anchor, 0.0, hypo, hyper)
    }

    /// `|x|` on the real line.
    pub fn abs_1d() -> Self {
        Self::max_affine(
            DVector::zeros(1),
            &[DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        )
        .expect("static model")
    }

    /// Smooth model `(v, Δ) + ½(AΔ, Δ)`.
    pub fn quadratic(anchor: DVector<f64>, linear: DVector<f64>, matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(anchor, 0.0, vec![QuadPiece::new(0.0, linear, matrix)?], Vec::new())
    }

    /// The sum of two models with a common anchor, again a max/min model:
    /// its pieces are all pairwise sums.
    pub fn compose_sum(&self, other: &MaxMinQuadModel) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        if (&self.anchor - &other.anchor).amax() > 0.0 {
            return Err(Error::invalid("composed models must share an anchor"));
        }
        let hypo = self
            .hypo
            .iter()
            .flat_map(|p| other.hypo.iter().map(move |q| p.sum(q)))
            .collect();
        let hyper = match (self.hyper.is_empty(), other.hyper.is_empty()) {
            (true, true) => Vec::new(),
            (false, true) => self.hyper.clone(),
            (true, false) => other.hyper.clone(),
            (false, false) => self
                .hyper
                .iter()
                .flat_map(|p| other.hyper.iter().map(move |q| p.sum(q)))
                .collect(),
        };
        Self::new(self.anchor.clone(), self.base + other.base, hypo, hyper)
    }

    pub fn with_tie_tol(mut self, tol: f64) -> Self {
        self.tie_tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn hypo_pieces(&self) -> &[QuadPiece] {
        &self.hypo
    }

    pub fn hyper_pieces(&self) -> &[QuadPiece] {
        &self.hyper
    }

    pub fn tie_tol(&self) -> f64 {
        self.tie_tol
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.anchor;
        let top = self.hypo.iter().map(|p| p.value(&d)).fold(f64::NEG_INFINITY, f64::max);
        let bottom = if self.hyper.is_empty() {
            0.0
        } else {
            self.hyper.iter().map(|p| p.value(&d)).fold(f64::INFINITY, f64::min)
        };
        self.base + top + bottom
    }

    /// Index of the unique maximizing hypo piece and minimizing hyper piece at `x`.
    pub fn active_pieces(&self, x: &DVector<f64>, tie_tol: f64) -> Result<(usize, Option<usize>)> {
        check_dim(self.dim(), x.len())?;
        let d = x - &self.anchor;
        let tie = || Error::NonDifferentiable {
            point: x.iter().copied().collect(),
        };
        let hv: Vec<f64> = self.hypo.iter().map(|p| p.value(&d)).collect();
        let i = unique_extremum(&hv, tie_tol, true).ok_or_else(tie)?;
        let j = if self.hyper.is_empty() {
            None
        } else {
            let bv: Vec<f64> = self.hyper.iter().map(|p| p.value(&d)).collect();
            Some(unique_extremum(&bv, tie_tol, false).ok_or_else(tie)?)
        };
        Ok((i, j))
    }

    pub fn gradient_at(&self, x: &DVector<f64>, tie_tol: f64) -> Result<DVector<f64>> {
        let (i, j) = self.active_pieces(x, tie_tol)?;
        let d = x - &self.anchor;
        let mut g = self.hypo[i].gradient(&d);
        if let Some(j) = j {
            g += self.hyper[j].gradient(&d);
        }
        Ok(g)
    }

    pub fn hessian_at(&self, x: &DVector<f64>, tie_tol: f64) -> Result<DMatrix<f64>> {
        let (i, j) = self.active_pieces(x, tie_tol)?;
        let mut h = self.hypo[i].quadratic.clone();
        if let Some(j) = j {
            h += &self.hyper[j].quadratic;
        }
        Ok(h)
    }

    /// `true` when every piece is a pure quadratic form, so that
    /// `h(λq) = λ²h(q)`.
    pub fn is_positively_homogeneous_2(&self) -> bool {
        self.base == 0.0
            && self
                .hypo
                .iter()
                .chain(&self.hyper)
                .all(|p| p.offset == 0.0 && p.linear.iter().all(|&c| c == 0.0))
    }

    /// `[co{v_i active}, co{w_j active}]` at the anchor, where a piece is
    /// active when its offset is extreme.
    pub fn anchor_quasidifferential(&self) -> Result<SetPair> {
        let pick = |pieces: &[QuadPiece]| -> Result<Polytope> {
            let scale = pieces.iter().fold(0.0_f64, |m, p| m.max(p.offset.abs()));
            Polytope::new(
                pieces
                    .iter()
                    .filter(|p| p.offset.abs() <= self.tie_tol * scale)
                    .map(|p| p.linear.clone())
                    .collect(),
            )
        };
        let lower = pick(&self.hypo)?;
        let upper = if self.hyper.is_empty() {
            Polytope::origin(self.dim())
        } else {
            pick(&self.hyper)?
        };
        SetPair::new(lower, upper)
    }

    /// The matrices of the hypo pieces.
    pub fn hypo_matrices(&self) -> Vec<DMatrix<f64>> {
        self.hypo.iter().map(|p| p.quadratic.clone()).collect()
    }
}

fn unique_extremum(values: &[f64], tie_tol: f64, maximize: bool) -> Option<usize> {
    let (best_idx, best) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, if maximize { f64::NEG_INFINITY } else { f64::INFINITY }), |acc, (i, v)| {
            if (maximize && v > acc.1) || (!maximize && v < acc.1) {
                (i, v)
            } else {
                acc
            }
        });
    // relative to the size of the competing values, so ties are resolved
    // correctly arbitrarily close to the anchor
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let slack = tie_tol * scale;
    let ties = values
        .iter()
        .filter(|&&v| (v - best).abs() <= slack)
        .count();
    (ties == 1).then_some(best_idx)
}

/// `h(q) = max_k ½(A_k q, q)` anchored at the origin.
pub fn ph2_from_matrix_set(mats: &[DMatrix<f64>]) -> Result<MaxMinQuadModel> {
    let first = mats
        .first()
        .ok_or_else(|| Error::invalid("matrix set must be nonempty"))?;
    let n = first.nrows();
    let pieces = mats
        .iter()
        .map(|a| QuadPiece::new(0.0, DVector::zeros(n), a.clone()))
        .collect::<Result<Vec<_>>>()?;
    MaxMinQuadModel::new(DVector::zeros(n), 0.0, pieces, Vec::new())
}

fn segment_roots(c0: f64, c1: f64, c2: f64, out: &mut Vec<f64>) {
    let inside = |t: f64| t > 0.0 && t < 1.0;
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale == 0.0 {
        return;
    }
    if c2.abs() <= 1e-14 * scale {
        if c1.abs() > 1e-14 * scale {
            let t = -c0 / c1;
            if inside(t) {
                out.push(t);
            }
        }
        return;
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    // numerically stable pair of roots
    let q = -0.5 * (c1 + c1.signum() * sq);
    let mut roots = Vec::with_capacity(2);
    if q != 0.0 {
        roots.push(q / c2);
        roots.push(c0 / q);
    } else {
        roots.push(0.0);
    }
    out.extend(roots.into_iter().filter(|&t| inside(t)));
}

fn pairwise_crossings(pieces: &[QuadPiece], d0: &DVector<f64>, dir: &DVector<f64>, out: &mut Vec<f64>) {
    // piece value along d0 + t·dir is c0 + c1 t + c2 t²
    let coeffs: Vec<(f64, f64, f64)> = pieces
        .iter()
        .map(|p| {
            let ad0 = &p.quadratic * d0;
            let adir = &p.quadratic * dir;
            (
                p.value(d0),
                p.linear.dot(dir) + ad0.dot(dir),
                0.5 * dir.dot(&adir),
            )
        })
        .collect();
    for i in 0..coeffs.len() {
        for j in (i + 1)..coeffs.len() {
            let (a, b) = (coeffs[i], coeffs[j]);
            segment_roots(a.0 - b.0, a.1 - b.1, a.2 - b.2, out);
        }
    }
}

impl Objective for MaxMinQuadModel {
    fn dim(&self) -> usize {
        self.anchor.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.eval_unchecked(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.gradient_at(x, self.tie_tol)
    }

    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.hessian_at(x, self.tie_tol)
    }

    fn breakpoints(&self, from: &DVector<f64>, to: &DVector<f64>) -> Option<Vec<f64>> {
        let d0 = from - &self.anchor;
        let dir = to - from;
        let mut ts = Vec::new();
        pairwise_crossings(&self.hypo, &d0, &dir, &mut ts);
        pairwise_crossings(&self.hyper, &d0, &dir, &mut ts);
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        Some(ts)
    }

    fn lipschitz_hint(&self) -> f64 {
        let piece = |p: &QuadPiece| p.linear.norm() + p.quadratic.norm();
        let top = self.hypo.iter().map(piece).fold(0.0, f64::max);
        let bottom = self.hyper.iter().map(piece).fold(0.0, f64::max);
        (top + bottom).max(1e-3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn diag(xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&v(xs))
    }

    #[test]
    fn abs_model_values_and_gradients() {
        let m = MaxMinQuadModel::abs_1d();
        assert_eq!(m.evaluate(&v(&[0.5])).unwrap(), 0.5);
        assert_eq!(m.evaluate(&v(&[0.0])).unwrap(), 0.0);
        assert_eq!(m.gradient(&v(&[0.5])).unwrap()[0], 1.0);
        assert!(matches!(
            m.gradient(&v(&[0.0])),
            Err(Error::NonDifferentiable { .. })
        ));
    }

    #[test]
    fn max_of_coordinates() {
        let m = MaxMinQuadModel::max_affine(v(&[0.0, 0.0]), &[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert!((m.evaluate(&v(&[0.3, 0.7])).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn ph2_gradient_and_hessian() {
        let h = ph2_from_matrix_set(&[diag(&[2.0, 0.0]), diag(&[0.0, 2.0])]).unwrap();
        let q = v(&[1.0, 0.5]);
        assert_eq!(h.gradient(&q).unwrap(), v(&[2.0, 0.0]));
        assert_eq!(h.hessian(&q).unwrap(), diag(&[2.0, 0.0]));
        assert!(h.hessian(&v(&[0.7, 0.7])).is_err());
        assert!((h.value(&q) - 1.0).abs() < 1e-15);
        assert!(h.is_positively_homogeneous_2());
    }

    #[test]
    fn ph2_examples() {
        let id = ph2_from_matrix_set(&[DMatrix::identity(2, 2)]).unwrap();
        assert!((id.value(&v(&[3.0, 4.0])) - 12.5).abs() < 1e-12);
        let z = ph2_from_matrix_set(&[DMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(z.value(&v(&[3.0, 4.0])), 0.0);
        assert!(ph2_from_matrix_set(&[]).is_err());
    }

    #[test]
    fn affine_model_has_zero_hessian() {
        let m = MaxMinQuadModel::max_affine(v(&[1.0, 1.0]), &[v(&[1.0, 2.0])]).unwrap();
        assert_eq!(m.hessian(&v(&[0.3, -2.0])).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn symmetrize_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert_eq!(
            symmetrize(&a).unwrap(),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
        let s = diag(&[1.0, 3.0]);
        assert_eq!(symmetrize(&s).unwrap(), s);
        assert!(symmetrize(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn offsets_are_normalized() {
        let m = MaxMinQuadModel::new(
            v(&[0.0]),
            1.0,
            vec![QuadPiece::affine(0.5, v(&[1.0])), QuadPiece::affine(-1.0, v(&[-1.0]))],
            vec![QuadPiece::affine(0.25, v(&[0.0]))],
        )
        .unwrap();
        assert_eq!(m.base(), 1.75);
        let top = m.hypo_pieces().iter().map(|p| p.offset).fold(f64::MIN, f64::max);
        assert_eq!(top, 0.0);
        assert_eq!(m.hyper_pieces()[0].offset, 0.0);
        assert_eq!(m.evaluate(&v(&[0.0])).unwrap(), 1.75);
    }

    #[test]
    fn breakpoints_along_a_segment() {
        let m = MaxMinQuadModel::abs_1d();
        let ts = m.breakpoints(&v(&[-1.0]), &v(&[3.0])).unwrap();
        assert_eq!(ts.len(), 1);
        assert!((ts[0] - 0.25).abs() < 1e-15);
        let h = ph2_from_matrix_set(&[diag(&[2.0, 0.0]), diag(&[0.0, 2.0])]).unwrap();
        // q(t) = (1, -0.5 + 2.5t) meets |q1| = |q2| inside (0, 1) only at t = 0.6
        let ts = h.breakpoints(&v(&[1.0, -0.5]), &v(&[1.0, 2.0])).unwrap();
        assert_eq!(ts.len(), 1);
        assert!((ts[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn compose_sum_adds_functions() {
        let a = MaxMinQuadModel::abs_1d();
        let b = MaxMinQuadModel::quadratic(v(&[0.0]), v(&[0.0]), diag(&[2.0])).unwrap();
        let c = a.compose_sum(&b).unwrap();
        for x in [-0.7, -0.1, 0.2, 1.3] {
            let p = v(&[x]);
            assert!((c.value(&p) - (x.abs() + x * x)).abs() < 1e-14);
        }
    }
}
