mod common;

use codiff::convex_geometry::{DirectionSampler, Polytope, SetPair};
use codiff::first_order::{
    estimate_df, limit_gradient_hull, quasi_equivalent, recover_pair, DfConfig,
};
use codiff::function_models::{FnObjective, MaxMinQuadModel, Sawtooth};
use common::{brute_demyanov, hull_hausdorff, v};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn df(f: &dyn codiff::function_models::Objective, x: &DVector<f64>) -> Polytope {
    estimate_df(f, x, &DfConfig::default()).unwrap().set
}

#[test]
fn abs_has_the_unit_interval() {
    let got = df(&MaxMinQuadModel::abs_1d(), &v(&[0.0]));
    assert!(hull_hausdorff(got.vertices(), &[v(&[-1.0]), v(&[1.0])]) <= 1e-9);
}

#[test]
fn smooth_function_collapses_to_the_gradient() {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let f = MaxMinQuadModel::quadratic(v(&[0.0, 0.0]), v(&[0.3, -0.7]), a.clone()).unwrap();
    let x = v(&[0.4, 0.1]);
    let grad = v(&[0.3, -0.7]) + &a * &x;
    let got = df(&f, &x);
    assert!(hull_hausdorff(got.vertices(), &[grad]) <= 1e-6);
}

#[test]
fn callback_objectives_work() {
    // |x| + |y| through the callback wrapper
    let f = FnObjective::new(2, |x: &DVector<f64>| x[0].abs() + x[1].abs(), |x: &DVector<f64>| {
        Some(DVector::from_fn(2, |i, _| x[i].signum()))
    });
    let got = df(&f, &v(&[0.0, 0.0]));
    let square = [v(&[1.0, 1.0]), v(&[1.0, -1.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0])];
    assert!(hull_hausdorff(got.vertices(), &square) <= 1e-6);
}

#[test]
fn minus_abs_gives_the_interval_too() {
    // min(x, −x): superdifferential [−1, 1], Df is its negative hull
    let f = MaxMinQuadModel::difference_of_convex(v(&[0.0]), &[v(&[0.0])], &[v(&[1.0]), v(&[-1.0])]).unwrap();
    let got = df(&f, &v(&[0.0]));
    assert!(hull_hausdorff(got.vertices(), &[v(&[-1.0]), v(&[1.0])]) <= 1e-9);
}

#[test]
fn sawtooth_averages_flatten_while_gradients_do_not() {
    let f = Sawtooth::new(12).unwrap();
    let x = v(&[0.0]);
    assert!(df(&f, &x).radius() <= 0.05);
    let hull = limit_gradient_hull(&f, &x, 0.05, 4000, 11).unwrap();
    let lo = hull.vertices().iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = hull.vertices().iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    assert!(lo <= -0.9 && hi >= 0.9, "[{lo}, {hi}]");
}

#[test]
fn recovered_pair_is_equivalent_to_the_canonical_one() {
    let vs = [v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[-1.0, -1.0])];
    let ws = [v(&[0.5, 0.5]), v(&[-0.5, 0.2])];
    let f = MaxMinQuadModel::difference_of_convex(v(&[0.0, 0.0]), &vs, &ws).unwrap();
    let d = df(&f, &v(&[0.0, 0.0]));
    let upper = Polytope::new(ws.to_vec()).unwrap();
    let canonical = SetPair::new(Polytope::new(vs.to_vec()).unwrap(), upper.clone()).unwrap();
    let recovered = recover_pair(&d, &upper).unwrap();
    assert!(quasi_equivalent(&recovered, &canonical, 1e-3, &DirectionSampler::with_seed(2)).unwrap());
}

fn slopes(dim: usize) -> impl Strategy<Value = Vec<DVector<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0_f64, dim).prop_map(DVector::from_vec), dim + 1..=5)
        .prop_filter("slopes at least 0.2 apart", |s| {
            s.iter().enumerate().all(|(i, a)| s[..i].iter().all(|b| (a - b).norm() >= 0.2))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn max_affine_df_is_the_slope_hull(s in slopes(2)) {
        let f = MaxMinQuadModel::max_affine(v(&[0.0, 0.0]), &s).unwrap();
        let got = df(&f, &v(&[0.0, 0.0]));
        prop_assert!(hull_hausdorff(got.vertices(), &s) <= 1e-3);
    }

    #[test]
    fn dc_df_is_the_demyanov_difference(vs in slopes(2), ws in slopes(2)) {
        let f = MaxMinQuadModel::difference_of_convex(v(&[0.0, 0.0]), &vs, &ws).unwrap();
        let got = df(&f, &v(&[0.0, 0.0]));
        let neg: Vec<DVector<f64>> = ws.iter().map(|w| -w).collect();
        prop_assert!(hull_hausdorff(got.vertices(), &brute_demyanov(&vs, &neg)) <= 1e-3);
    }
}
