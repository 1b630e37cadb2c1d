use crate::convex_geometry::{demyanov_difference, hausdorff_distance, minkowski_sum, DirectionSampler, Polytope, SetPair};
use crate::error::{check_dim, Result};

/// A quasidifferential pair `(Df + (−S), S)` with the chosen superdifferential
/// `S`; its lower set minus the negated upper set reproduces `Df`.
pub fn recover_pair(df: &Polytope, superdiff: &Polytope) -> Result<SetPair> {
    check_dim(df.dim(), superdiff.dim())?;
    SetPair::new(minkowski_sum(df, &superdiff.negate())?, superdiff.clone())
}

/// `∂̲ ⇀ (−∂̄)` for a quasidifferential pair.
pub fn quasi_difference(pair: &SetPair, sampler: &DirectionSampler) -> Result<Polytope> {
    demyanov_difference(&pair.lower, &pair.upper.negate(), sampler)
}

/// Quasidifferential pairs are equivalent when `∂̲ ⇀ (−∂̄)` agree.
pub fn quasi_equivalent(p: &SetPair, q: &SetPair, tol: f64, sampler: &DirectionSampler) -> Result<bool> {
    check_dim(p.dim(), q.dim())?;
    let dp = quasi_difference(p, sampler)?;
    let dq = quasi_difference(q, sampler)?;
    Ok(hausdorff_distance(&dp, &dq)? <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_examples() {
        let df = Polytope::interval(-1.0, 1.0);
        let p = recover_pair(&df, &Polytope::origin(1)).unwrap();
        assert!(hausdorff_distance(&p.lower, &df).unwrap() < 1e-12);
        let p = recover_pair(&df, &df).unwrap();
        assert!(hausdorff_distance(&p.lower, &Polytope::interval(-2.0, 2.0)).unwrap() < 1e-12);
        let s = DirectionSampler::default();
        let d = demyanov_difference(&p.lower, &p.upper.negate(), &s).unwrap();
        assert!(hausdorff_distance(&d, &df).unwrap() < 1e-12);
    }

    #[test]
    fn asymmetric_superdifferential() {
        let df = Polytope::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let sup = Polytope::from_rows(&[vec![0.0, 0.0], vec![2.0, 1.0]]).unwrap();
        let canonical = SetPair::new(df.clone(), Polytope::origin(2)).unwrap();
        let p = recover_pair(&df, &sup).unwrap();
        assert!(quasi_equivalent(&p, &canonical, 1e-9, &DirectionSampler::default()).unwrap());
    }
}
