//! Second-order objects: matrix hulls of limit Hessians, the double-smoothing
//! subdifferential `Ψ²`, the reduction `f̃`, and second codifferentials.
//!
//! Matrices are handled in flattened symmetric coordinates (see
//! [`flatten_sym`]), where a quadratic term `½(AΔ, Δ)` is the linear form
//! `½⟨flat(A), flat(ΔΔᵀ)⟩`.

mod matrix_set;
mod psi;

use nalgebra::{DMatrix, DVector};

use crate::convex_geometry::{Polytope, SetPair};
use crate::error::{check_dim, Error, Result};
use crate::first_order::{direction_grid, estimate_df, DfConfig};
use crate::function_models::{MaxMinQuadModel, Objective};

pub use matrix_set::{
    flatten_sym, matrix_demyanov_difference, matrix_hausdorff, matrix_minkowski_sum, recover_matrix_pair, sym_dim,
    unflatten_sym, MatrixSet, MatrixSetDoc,
};
pub use psi::{estimate_psi2, psi_hessian, psi_smooth, psi_smooth_estimate, PsiConfig, PsiEstimate, PsiSample};

/// Hull of `f''(x + t·q)` over grid directions `q` where `f` is twice
/// differentiable. Tied points are skipped.
pub fn hessian_hull_on_rays<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    t: f64,
    grid: &[DVector<f64>],
) -> Result<MatrixSet> {
    check_dim(f.dim(), x.len())?;
    if !(t > 0.0) {
        return Err(Error::invalid("ray radius must be positive"));
    }
    let mut mats = Vec::new();
    for q in grid {
        check_dim(x.len(), q.len())?;
        match f.hessian(&(x + q * t)) {
            Ok(h) => mats.push((&h + h.transpose()) * 0.5),
            Err(Error::NonDifferentiable { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if mats.is_empty() {
        return Err(Error::DegenerateInput(
            "no grid direction has a unique active piece".into(),
        ));
    }
    MatrixSet::new(&mats)
}

/// `𝒜` of a positively homogeneous quadratic max-model: the Hessian is
/// constant along rays, so sampling the unit sphere suffices.
pub fn estimate_matrix_hull_ph2(h: &MaxMinQuadModel, grid: &[DVector<f64>]) -> Result<MatrixSet> {
    if !h.is_positively_homogeneous_2() {
        return Err(Error::invalid("model is not positively homogeneous of degree 2"));
    }
    hessian_hull_on_rays(h, h.anchor(), 1.0, grid)
}

/// `f̃(x + Δ) = f(x + Δ) − f(x) − max_{v∈∂̲}(v, Δ) − min_{w∈∂̄}(w, Δ)`.
pub struct FTilde<'a, F: Objective + ?Sized> {
    f: &'a F,
    x: DVector<f64>,
    fx: f64,
    pair: SetPair,
}

pub fn build_f_tilde<'a, F: Objective + ?Sized>(f: &'a F, x: &DVector<f64>, pair: &SetPair) -> Result<FTilde<'a, F>> {
    check_dim(f.dim(), x.len())?;
    check_dim(x.len(), pair.dim())?;
    Ok(FTilde {
        f,
        x: x.clone(),
        fx: f.value(x),
        pair: pair.clone(),
    })
}

impl<F: Objective + ?Sized> FTilde<'_, F> {
    pub fn base(&self) -> &DVector<f64> {
        &self.x
    }

    /// `f̃(x + Δ)`.
    pub fn at_offset(&self, delta: &DVector<f64>) -> f64 {
        self.value(&(&self.x + delta))
    }

    fn first_order(&self, d: &DVector<f64>) -> f64 {
        self.pair.lower.support_value(d) - self.pair.upper.negate().support_value(d)
    }

    fn linear_gradient(&self, d: &DVector<f64>) -> Option<DVector<f64>> {
        let lo = self.pair.lower.support(d).ok()?.unique()?;
        let neg = self.pair.upper.negate();
        let up = neg.support(d).ok()?.unique()?;
        Some(&self.pair.lower.vertices()[lo] - &neg.vertices()[up])
    }
}

impl<F: Objective + ?Sized> Objective for FTilde<'_, F> {
    fn dim(&self) -> usize {
        self.x.len()
    }

    fn value(&self, y: &DVector<f64>) -> f64 {
        let d = y - &self.x;
        self.f.value(y) - self.fx - self.first_order(&d)
    }

    fn gradient(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let d = y - &self.x;
        let lin = self
            .linear_gradient(&d)
            .ok_or_else(|| Error::NonDifferentiable { point: y.iter().copied().collect() })?;
        Ok(self.f.gradient(y)? - lin)
    }

    fn hessian(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = y - &self.x;
        if self.linear_gradient(&d).is_none() {
            return Err(Error::NonDifferentiable { point: y.iter().copied().collect() });
        }
        self.f.hessian(y)
    }

    fn lipschitz_hint(&self) -> f64 {
        self.f.lipschitz_hint() + self.pair.lower.radius() + self.pair.upper.radius()
    }
}

/// Second hypo- and hyperdifferential in `[offset, v, flat(A)]` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondCodifferentialPair {
    n: usize,
    hypo2: Polytope,
    hyper2: Polytope,
}

impl SecondCodifferentialPair {
    pub fn new(n: usize, hypo2: Polytope, hyper2: Polytope) -> Result<Self> {
        let width = 1 + n + sym_dim(n);
        check_dim(width, hypo2.dim())?;
        check_dim(width, hyper2.dim())?;
        let offsets = |p: &Polytope| p.vertices().iter().map(|v| v[0]).collect::<Vec<_>>();
        let a = offsets(&hypo2);
        let b = offsets(&hyper2);
        let amax = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bmin = b.iter().copied().fold(f64::INFINITY, f64::min);
        if amax != 0.0 || bmin != 0.0 {
            return Err(Error::invalid(format!(
                "offsets must satisfy max a = 0 and min b = 0, found {amax} and {bmin}"
            )));
        }
        Ok(Self { n, hypo2, hyper2 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hypo2(&self) -> &Polytope {
        &self.hypo2
    }

    pub fn hyper2(&self) -> &Polytope {
        &self.hyper2
    }

    fn lifted(&self, delta: &DVector<f64>) -> DVector<f64> {
        let sq = flatten_sym(&(delta * delta.transpose())) * 0.5;
        let mut l = DVector::zeros(1 + self.n + sq.len());
        l[0] = 1.0;
        l.rows_mut(1, self.n).copy_from(delta);
        l.rows_mut(1 + self.n, sq.len()).copy_from(&sq);
        l
    }

    /// `max [a + (v,Δ) + ½(AΔ,Δ)] + min [b + (w,Δ) + ½(BΔ,Δ)]`.
    pub fn expansion(&self, delta: &DVector<f64>) -> f64 {
        let l = self.lifted(delta);
        let top = self.hypo2.support_value(&l);
        let bottom = -self.hyper2.support_value(&(-&l));
        top + bottom
    }
}

fn second_layer(v: &Polytope, m: &MatrixSet, depth: f64) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(2 * v.len() * m.len());
    for vv in v.vertices() {
        for mm in m.as_polytope().vertices() {
            for off in [0.0, depth] {
                let mut p = DVector::zeros(1 + vv.len() + mm.len());
                p[0] = off;
                p.rows_mut(1, vv.len()).copy_from(vv);
                p.rows_mut(1 + vv.len(), mm.len()).copy_from(mm);
                out.push(p);
            }
        }
    }
    out
}

/// Zero-offset triples are the vertices of the joint `[v, A]` set, the
/// `−a₀` (`+b₀`) layer repeats them.
pub fn assemble_second_codifferential(
    lower: &Polytope,
    a_set: &MatrixSet,
    upper: &Polytope,
    b_set: &MatrixSet,
    a0: f64,
    b0: f64,
) -> Result<SecondCodifferentialPair> {
    if !(a0 > 0.0 && b0 > 0.0) {
        return Err(Error::invalid("offset depths a0 and b0 must be positive"));
    }
    let n = lower.dim();
    check_dim(n, upper.dim())?;
    check_dim(n, a_set.n())?;
    check_dim(n, b_set.n())?;
    let hypo2 = Polytope::new(second_layer(lower, a_set, -a0))?;
    let hyper2 = Polytope::new(second_layer(upper, b_set, b0))?;
    SecondCodifferentialPair::new(n, hypo2, hyper2)
}

/// `|f(x+αg) − f(x) − expansion(αg)|`.
pub fn second_expansion_residual<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    pair: &SecondCodifferentialPair,
    alpha: f64,
    g: &DVector<f64>,
) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    check_dim(pair.n, x.len())?;
    check_dim(x.len(), g.len())?;
    if !(alpha > 0.0) {
        return Err(Error::invalid("expansion step must be positive"));
    }
    let d = g * alpha;
    Ok((f.value(&(x + &d)) - f.value(x) - pair.expansion(&d)).abs())
}

/// How `𝒜` was obtained.
#[derive(Clone, Debug)]
pub enum MatrixRoute {
    /// Exact Hessians of `f̃` on short rays.
    RayHessians { radius: f64 },
    /// Double smoothing.
    Smoothing { max_std_err: f64, noisy: bool },
}

#[derive(Clone, Debug)]
pub struct SecondConfig {
    pub df: DfConfig,
    /// Ray length for the Hessian route.
    pub ray_radius: f64,
    /// `None` selects [`direction_grid`].
    pub sphere: Option<Vec<DVector<f64>>>,
    pub psi: PsiConfig,
    /// Also run the smoothing route when Hessians are available and report
    /// the distance between the two.
    pub cross_check: bool,
    pub a0: f64,
}

impl Default for SecondConfig {
    fn default() -> Self {
        Self {
            df: DfConfig::default(),
            ray_radius: 1e-3,
            sphere: None,
            psi: PsiConfig::default(),
            cross_check: false,
            a0: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SecondHypoResult {
    pub subdiff: Polytope,
    pub a_set: MatrixSet,
    pub codiff: SecondCodifferentialPair,
    pub route: MatrixRoute,
    /// Frobenius-Hausdorff distance between the two routes, when both ran.
    pub cross_check: Option<f64>,
}

impl SecondHypoResult {
    pub fn hypo2(&self) -> &Polytope {
        self.codiff.hypo2()
    }
}

/// The four steps for a hypodifferentiable `f`: `∂̲f(x)` from averaged
/// gradients, `f̃` with superdifferential `{0}`, `𝒜 = Ψ²f̃(x)`, assembly.
pub fn second_hypodiff_algorithm<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    cfg: &SecondConfig,
) -> Result<SecondHypoResult> {
    check_dim(f.dim(), x.len())?;
    let n = x.len();
    let subdiff = estimate_df(f, x, &cfg.df)?.set;
    let pair = SetPair::new(subdiff.clone(), Polytope::origin(n))?;
    let ft = build_f_tilde(f, x, &pair)?;
    let grid = cfg.sphere.clone().unwrap_or_else(|| direction_grid(n));
    let smoothing = || estimate_psi2(&ft, x, &cfg.psi);
    let (a_set, route, cross_check) = match hessian_hull_on_rays(&ft, x, cfg.ray_radius, &grid) {
        Ok(set) => {
            let check = if cfg.cross_check {
                Some(matrix_hausdorff(&set, &smoothing()?.set)?)
            } else {
                None
            };
            (set, MatrixRoute::RayHessians { radius: cfg.ray_radius }, check)
        }
        Err(Error::Unsupported(_)) => {
            let est = smoothing()?;
            let route = MatrixRoute::Smoothing {
                max_std_err: est.max_std_err,
                noisy: est.noisy,
            };
            (est.set, route, None)
        }
        Err(e) => return Err(e),
    };
    let codiff = assemble_second_codifferential(&subdiff, &a_set, &Polytope::origin(n), &MatrixSet::zero(n), cfg.a0, 1.0)?;
    Ok(SecondHypoResult {
        subdiff,
        a_set,
        codiff,
        route,
        cross_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_geometry::hausdorff_distance;
    use crate::first_order::circle_grid;
    use crate::function_models::ph2_from_matrix_set;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn diag(a: f64, b: f64) -> DMatrix<f64> {
        DMatrix::from_diagonal(&v(&[a, b]))
    }

    #[test]
    fn ph2_two_diagonals() {
        let h = ph2_from_matrix_set(&[diag(2.0, 0.0), diag(0.0, 2.0)]).unwrap();
        let got = estimate_matrix_hull_ph2(&h, &circle_grid(720, 0.0)).unwrap();
        let want = MatrixSet::new(&[diag(2.0, 0.0), diag(0.0, 2.0)]).unwrap();
        assert!(matrix_hausdorff(&got, &want).unwrap() < 1e-12);
        let id = ph2_from_matrix_set(&[DMatrix::identity(2, 2)]).unwrap();
        assert_eq!(estimate_matrix_hull_ph2(&id, &circle_grid(36, 0.0)).unwrap().len(), 1);
        let shifted = MaxMinQuadModel::quadratic(v(&[0.0, 0.0]), v(&[1.0, 0.0]), diag(1.0, 1.0)).unwrap();
        assert!(estimate_matrix_hull_ph2(&shifted, &circle_grid(8, 0.0)).is_err());
    }

    #[test]
    fn f_tilde_of_abs_vanishes() {
        let f = MaxMinQuadModel::abs_1d();
        let pair = SetPair::new(Polytope::interval(-1.0, 1.0), Polytope::origin(1)).unwrap();
        let ft = build_f_tilde(&f, &v(&[0.0]), &pair).unwrap();
        for d in [-0.3, -1e-4, 0.0, 0.2] {
            assert_eq!(ft.at_offset(&v(&[d])), 0.0);
        }
    }

    #[test]
    fn abs_plus_square() {
        let f = MaxMinQuadModel::abs_1d()
            .compose_sum(&MaxMinQuadModel::quadratic(v(&[0.0]), v(&[0.0]), DMatrix::from_element(1, 1, 2.0)).unwrap())
            .unwrap();
        let res = second_hypodiff_algorithm(&f, &v(&[0.0]), &SecondConfig::default()).unwrap();
        assert!(hausdorff_distance(&res.subdiff, &Polytope::interval(-1.0, 1.0)).unwrap() < 1e-6);
        let two = MatrixSet::singleton(&DMatrix::from_element(1, 1, 2.0)).unwrap();
        assert!(matrix_hausdorff(&res.a_set, &two).unwrap() < 1e-12);
        for g in [1.0, -1.0] {
            let r = second_expansion_residual(&f, &v(&[0.0]), &res.codiff, 1e-2, &v(&[g])).unwrap();
            assert!(r / 1e-4 < 1e-9);
        }
    }

    #[test]
    fn smooth_quadratic_collapses() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let f = MaxMinQuadModel::quadratic(v(&[0.0, 0.0]), v(&[1.0, -2.0]), a.clone()).unwrap();
        let res = second_hypodiff_algorithm(&f, &v(&[0.0, 0.0]), &SecondConfig::default()).unwrap();
        assert!(hausdorff_distance(&res.subdiff, &Polytope::point(v(&[1.0, -2.0]))).unwrap() < 1e-6);
        assert!(matrix_hausdorff(&res.a_set, &MatrixSet::singleton(&a).unwrap()).unwrap() < 1e-12);
        assert_eq!(res.hypo2().len(), 2);
    }

    #[test]
    fn assemble_normalization() {
        let a = MatrixSet::new(&[diag(2.0, 0.0), diag(0.0, 2.0)]).unwrap();
        let c = assemble_second_codifferential(
            &Polytope::origin(2),
            &a,
            &Polytope::origin(2),
            &MatrixSet::zero(2),
            1.0,
            1.0,
        )
        .unwrap();
        let d = v(&[0.3, -0.1]);
        assert!((c.expansion(&d) - 0.09).abs() < 1e-15);
        assert!(assemble_second_codifferential(&Polytope::origin(2), &a, &Polytope::origin(2), &a, 1.0, 0.0).is_err());
    }
}
