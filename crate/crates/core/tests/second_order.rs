mod common;

use codiff::first_order::{circle_grid, BallMapFamily};
use codiff::function_models::{ph2_from_matrix_set, MaxMinQuadModel, Objective};
use codiff::harness::battery::{abs_plus_square, random_composed};
use codiff::rng::stream;
use codiff::second_order::{
    estimate_matrix_hull_ph2, flatten_sym, matrix_hausdorff, psi_hessian, psi_smooth_estimate,
    second_expansion_residual, second_hypodiff_algorithm, sym_dim, unflatten_sym, MatrixSet, SecondConfig,
};
use common::v;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn symmetric(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-2.0..2.0_f64, n * n).prop_map(move |c| {
        let m = DMatrix::from_vec(n, n, c);
        (&m + m.transpose()) * 0.5
    })
}

fn sized_pair() -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (1usize..=3).prop_flat_map(|n| (symmetric(n), symmetric(n)))
}

proptest! {
    #[test]
    fn flattening_is_an_isometry((a, b) in sized_pair()) {
        let fa = flatten_sym(&a);
        prop_assert_eq!(fa.len(), sym_dim(a.nrows()));
        let frob = (&a - &b).norm();
        prop_assert!((frob - (fa - flatten_sym(&b)).norm()).abs() <= 1e-12);
        prop_assert!((unflatten_sym(&flatten_sym(&a), a.nrows()).unwrap() - &a).amax() <= 1e-15);
    }

    #[test]
    fn quadratic_form_is_an_inner_product(a in symmetric(3), q in prop::collection::vec(-1.0..1.0_f64, 3)) {
        let q = DVector::from_vec(q);
        let lhs = 0.5 * q.dot(&(&a * &q));
        let rhs = 0.5 * flatten_sym(&a).dot(&flatten_sym(&(&q * q.transpose())));
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The hull is built on one grid and checked on directions off it.
    #[test]
    fn ph2_hull_reproduces_held_out_values(a in symmetric(2), b in symmetric(2), phase in 0.001..0.01_f64) {
        let h = ph2_from_matrix_set(&[a, b]).unwrap();
        let hull = estimate_matrix_hull_ph2(&h, &circle_grid(360, 0.0)).unwrap();
        for q in circle_grid(97, phase) {
            let want = h.value(&q);
            prop_assert!((hull.quad_max(&q) - want).abs() <= 1e-9, "{} vs {}", hull.quad_max(&q), want);
        }
    }
}

#[test]
fn diagonal_hull_is_recovered() {
    let diag = [DMatrix::from_diagonal(&v(&[2.0, 0.0])), DMatrix::from_diagonal(&v(&[0.0, 2.0]))];
    let hull = estimate_matrix_hull_ph2(&ph2_from_matrix_set(&diag).unwrap(), &circle_grid(720, 0.0)).unwrap();
    assert!(matrix_hausdorff(&hull, &MatrixSet::new(&diag).unwrap()).unwrap() <= 1e-6);
}

#[test]
fn non_homogeneous_models_are_rejected_by_the_hull_route() {
    let f = MaxMinQuadModel::abs_1d();
    assert!(estimate_matrix_hull_ph2(&f, &circle_grid(8, 0.0)[..1]).is_err());
}

#[test]
fn monte_carlo_is_independent_of_thread_count() {
    let f = abs_plus_square().unwrap();
    let family = BallMapFamily::default_family(&v(&[0.0]));
    let map = &family[0];
    let x = v(&[map.annulus_mid(40)]);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let value = psi_smooth_estimate(&f, &x, map, 20_000, 9).unwrap();
            let (h, se) = psi_hessian(&f, &x, map, 1e-2 * map.annulus_mid(40), 20_000, 9).unwrap();
            (value, h, se)
        })
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.0, four.0);
    assert_eq!(one.1, four.1);
    assert_eq!(one.2, four.2);
}

#[test]
fn abs_plus_square_is_recovered_exactly() {
    let f = abs_plus_square().unwrap();
    let x = v(&[0.0]);
    let res = second_hypodiff_algorithm(&f, &x, &SecondConfig::default()).unwrap();
    let a = matrix_hausdorff(&res.a_set, &MatrixSet::singleton(&DMatrix::from_element(1, 1, 2.0)).unwrap()).unwrap();
    assert!(a <= 1e-6);
    for s in [-1.0, 1.0] {
        let r = second_expansion_residual(&f, &x, &res.codiff, 1e-2, &v(&[s])).unwrap();
        assert!(r <= 1e-9);
    }
}

#[test]
fn composed_models_match_their_generators() {
    for seed in 0..3 {
        let case = random_composed(&mut stream(seed)).unwrap();
        let x = DVector::zeros(2);
        let res = second_hypodiff_algorithm(&case.model, &x, &SecondConfig::default()).unwrap();
        let want = MatrixSet::new(&case.matrices).unwrap();
        assert!(matrix_hausdorff(&res.a_set, &want).unwrap() <= 0.1);
        let mut worst: f64 = 0.0;
        for g in circle_grid(180, 0.0) {
            worst = worst.max(second_expansion_residual(&case.model, &x, &res.codiff, 1e-2, &g).unwrap() / 1e-4);
        }
        assert!(worst <= 0.05, "{worst}");
    }
}
