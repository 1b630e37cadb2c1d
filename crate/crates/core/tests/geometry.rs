mod common;

use codiff::convex_geometry::exact_fan::exact_demyanov_difference;
use codiff::convex_geometry::{
    demyanov_difference, hausdorff_distance, minkowski_sum, DirectionSampler, Polytope,
};
use common::{brute_demyanov, hull_hausdorff, v};
use nalgebra::DVector;
use proptest::prelude::*;

fn point(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-1.0..1.0_f64, dim).prop_map(DVector::from_vec)
}

fn points(dim: usize) -> impl Strategy<Value = Vec<DVector<f64>>> {
    prop::collection::vec(point(dim), 1..=6)
}

fn pair() -> impl Strategy<Value = (Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    (1usize..=2).prop_flat_map(|d| (points(d), points(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_difference_matches_brute_force((a, b) in pair()) {
        let pa = Polytope::new(a.clone()).unwrap();
        let pb = Polytope::new(b.clone()).unwrap();
        let got = demyanov_difference(&pa, &pb, &DirectionSampler::with_seed(3)).unwrap();
        let d = hull_hausdorff(got.vertices(), &brute_demyanov(&a, &b));
        prop_assert!(d <= 1e-6, "rho_H = {d}");
    }

    #[test]
    fn exact_fan_matches_brute_force((a, b) in pair()) {
        let got = exact_demyanov_difference(&Polytope::new(a.clone()).unwrap(), &Polytope::new(b.clone()).unwrap()).unwrap();
        let d = hull_hausdorff(got.vertices(), &brute_demyanov(&a, &b));
        prop_assert!(d <= 1e-9, "rho_H = {d}");
    }

    #[test]
    fn difference_with_itself_is_zero(a in points(2)) {
        let pa = Polytope::new(a).unwrap();
        let d = demyanov_difference(&pa, &pa, &DirectionSampler::with_seed(5)).unwrap();
        prop_assert!(d.radius() <= 1e-12);
    }

    #[test]
    fn difference_with_origin_is_identity(a in points(2)) {
        let pa = Polytope::new(a.clone()).unwrap();
        let d = demyanov_difference(&pa, &Polytope::origin(2), &DirectionSampler::with_seed(6)).unwrap();
        prop_assert!(hull_hausdorff(d.vertices(), &a) <= 1e-12);
    }

    #[test]
    fn difference_undoes_minkowski_sum(a in points(2), b in points(2)) {
        let pa = Polytope::new(a.clone()).unwrap();
        let pb = Polytope::new(b).unwrap();
        let sum = minkowski_sum(&pa, &pb).unwrap();
        let back = demyanov_difference(&sum, &pb, &DirectionSampler::with_seed(7)).unwrap();
        prop_assert!(hull_hausdorff(back.vertices(), &a) <= 1e-6);
    }

    #[test]
    fn hausdorff_is_a_metric(a in points(2), b in points(2), c in points(2)) {
        let (pa, pb, pc) = (Polytope::new(a.clone()).unwrap(), Polytope::new(b.clone()).unwrap(), Polytope::new(c).unwrap());
        let ab = hausdorff_distance(&pa, &pb).unwrap();
        prop_assert!((ab - hausdorff_distance(&pb, &pa).unwrap()).abs() <= 1e-12);
        prop_assert!(hausdorff_distance(&pa, &pa).unwrap() <= 1e-12);
        let bc = hausdorff_distance(&pb, &pc).unwrap();
        prop_assert!(hausdorff_distance(&pa, &pc).unwrap() <= ab + bc + 1e-9);
        prop_assert!((ab - hull_hausdorff(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn translation_moves_by_its_length(a in points(2), t in point(2)) {
        let pa = Polytope::new(a).unwrap();
        let d = hausdorff_distance(&pa, &pa.translate(&t)).unwrap();
        prop_assert!((d - t.norm()).abs() <= 1e-9);
    }

    #[test]
    fn support_is_additive(a in points(3), b in points(3), q in point(3)) {
        let (pa, pb) = (Polytope::new(a).unwrap(), Polytope::new(b).unwrap());
        let sum = minkowski_sum(&pa, &pb).unwrap();
        let lhs = sum.support_value(&q);
        prop_assert!((lhs - pa.support_value(&q) - pb.support_value(&q)).abs() <= 1e-9);
    }
}

#[test]
fn square_minus_segment() {
    let square = [v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])];
    let seg = [v(&[0.0, 0.0]), v(&[1.0, 0.0])];
    let got = demyanov_difference(
        &Polytope::new(square.to_vec()).unwrap(),
        &Polytope::new(seg.to_vec()).unwrap(),
        &DirectionSampler::with_seed(1),
    )
    .unwrap();
    let want = [v(&[0.0, 0.0]), v(&[0.0, 1.0])];
    assert!(hull_hausdorff(got.vertices(), &want) <= 1e-12);
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let a = Polytope::origin(2);
    let b = Polytope::origin(3);
    assert!(demyanov_difference(&a, &b, &DirectionSampler::with_seed(0)).is_err());
    assert!(hausdorff_distance(&a, &b).is_err());
}
