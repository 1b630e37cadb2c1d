//! The acceptance battery, one function per criterion.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::battery::{
    abs_plus_square, one_dim_battery, random_composed, random_dc, random_max_affine, random_polytope,
    random_two_generators,
};
use super::report::{ReportRow, RowSet};
use super::settings::{Budgets, Tolerances};
use crate::codifferential::{
    build_hypodifferential, continuity_profile, expansion_residual, line_grid, refinement_check, BuildConfig,
    ContinuityProfile,
};
use crate::convex_geometry::exact_fan::exact_demyanov_difference;
use crate::convex_geometry::{demyanov_difference, hausdorff_distance, DirectionSampler, Polytope, SetPair};
use crate::error::Result;
use crate::first_order::{
    circle_grid, direction_grid, estimate_df, estimate_phi, limit_gradient_hull, quasi_difference, recover_pair,
    DfConfig, PhiConfig,
};
use crate::function_models::{ph2_from_matrix_set, MaxMinQuadModel, Sawtooth};
use crate::rng::{path_seed, stream};
use crate::second_order::{
    estimate_matrix_hull_ph2, estimate_psi2, matrix_hausdorff, second_expansion_residual, second_hypodiff_algorithm,
    MatrixSet, PsiConfig, SecondConfig,
};

/// Everything a criterion produces.
pub struct CriterionOutput {
    pub rows: Vec<ReportRow>,
    pub profiles: Vec<(String, ContinuityProfile)>,
}

pub(crate) struct Ctx<'a> {
    pub seed: u64,
    pub tol: &'a Tolerances,
    pub budget: &'a Budgets,
    pub timing: bool,
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so that a broken estimate fails its row
    values
        .into_iter()
        .fold(0.0, |m: f64, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub(crate) fn c1_demyanov(ctx: &Ctx) -> Result<CriterionOutput> {
    let mut rows = RowSet::new("demyanov", "C1", ctx.timing);
    let t = Instant::now();
    let cases: Vec<(f64, f64, f64)> = (0..ctx.budget.pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(path_seed(ctx.seed, &[1, i as u64]));
            let dim = 1 + i % 2;
            let a = random_polytope(&mut rng, dim, 6)?;
            let b = random_polytope(&mut rng, dim, 6)?;
            let sampler = DirectionSampler::with_seed(path_seed(ctx.seed, &[1, i as u64, 1]));
            let sampled = demyanov_difference(&a, &b, &sampler)?;
            let exact = exact_demyanov_difference(&a, &b)?;
            let own = demyanov_difference(&a, &a, &sampler)?;
            let zero = demyanov_difference(&a, &Polytope::origin(dim), &sampler)?;
            Ok((
                hausdorff_distance(&sampled, &exact)?,
                hausdorff_distance(&own, &Polytope::origin(dim))?,
                hausdorff_distance(&zero, &a)?,
            ))
        })
        .collect::<Result<_>>()?;
    let elapsed = ms(t);
    rows.le("oracle", "max rho_H(A-B sampled, exact fan)", worst(cases.iter().map(|c| c.0)), ctx.tol.demyanov, elapsed);
    rows.le("self", "max rho_H(A-A, {0})", worst(cases.iter().map(|c| c.1)), ctx.tol.demyanov, 0.0);
    rows.le("zero", "max rho_H(A-{0}, A)", worst(cases.iter().map(|c| c.2)), ctx.tol.demyanov, 0.0);
    Ok(rows.finish(ms(t)))
}

pub(crate) fn c2_max_affine(ctx: &Ctx) -> Result<CriterionOutput> {
    let mut rows = RowSet::new("first-order", "C2", ctx.timing);
    let t = Instant::now();
    let cases: Vec<(usize, f64, usize)> = (0..ctx.budget.max_affine)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(path_seed(ctx.seed, &[2, i as u64]));
            let dim = 2 + i % 2;
            let (f, slopes) = random_max_affine(&mut rng, dim)?;
            let est = estimate_df(&f, &DVector::zeros(dim), &DfConfig::default())?;
            Ok((dim, hausdorff_distance(&est.set, &Polytope::new(slopes)?)?, est.unstable))
        })
        .collect::<Result<_>>()?;
    for dim in [2, 3] {
        let sel: Vec<&(usize, f64, usize)> = cases.iter().filter(|c| c.0 == dim).collect();
        let unstable: usize = sel.iter().map(|c| c.2).sum();
        rows.le_flagged(
            &format!("r{dim}"),
            &format!("max rho_H(Df(0), conv v_i) in R^{dim}"),
            worst(sel.iter().map(|c| c.1)),
            ctx.tol.df,
            if unstable > 0 { format!("unstable directions: {unstable}") } else { String::new() },
            0.0,
        );
    }
    Ok(rows.finish(ms(t)))
}

pub(crate) fn c3_dc(ctx: &Ctx) -> Result<CriterionOutput> {
    let mut rows = RowSet::new("first-order", "C3", ctx.timing);
    let t = Instant::now();
    let cases: Vec<(f64, f64)> = (0..ctx.budget.dc)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(path_seed(ctx.seed, &[3, i as u64]));
            let (f, v, w) = random_dc(&mut rng, 2)?;
            let lower = Polytope::new(v)?;
            let upper = Polytope::new(w)?;
            let canonical = SetPair::new(lower.clone(), upper.clone())?;
            let want = exact_demyanov_difference(&lower, &upper.negate())?;
            let est = estimate_df(&f, &DVector::zeros(2), &DfConfig::default())?;
            let sampler = DirectionSampler::with_seed(path_seed(ctx.seed, &[3, i as u64, 1]));
            let target = quasi_difference(&canonical, &sampler)?;
            let mut equiv: f64 = 0.0;
            for s in [upper.clone(), random_polytope(&mut rng, 2, 4)?] {
                let pair = recover_pair(&est.set, &s)?;
                equiv = equiv.max(hausdorff_distance(&quasi_difference(&pair, &sampler)?, &target)?);
            }
            Ok((hausdorff_distance(&est.set, &want)?, equiv))
        })
        .collect::<Result<_>>()?;
    rows.le("df", "max rho_H(Df(0), lower - (-upper))", worst(cases.iter().map(|c| c.0)), ctx.tol.dc, ms(t));
    rows.le("equivalence", "max rho_H of recovered vs canonical pair differences", worst(cases.iter().map(|c| c.1)), ctx.tol.dc, 0.0);
    Ok(rows.finish(ms(t)))
}

pub(crate) fn c4_phi(ctx: &Ctx) -> Result<CriterionOutput> {
    let mut rows = RowSet::new("first-order", "C4", ctx.timing);
    let t = Instant::now();
    let battery = one_dim_battery()?;
    let x0 = DVector::zeros(1);
    for (k, (f, slopes)) in battery.iter().enumerate() {
        let tk = Instant::now();
        let cfg = PhiConfig {
            mc: ctx.budget.mc_phi,
            seed: path_seed(ctx.seed, &[4, k as u64]),
            ..PhiConfig::default()
        };
        let phi = estimate_phi(f, &x0, &cfg)?;
        let df = estimate_df(f, &x0, &DfConfig::default())?;
        let name = format!("{slopes:?}");
        rows.le_flagged(
            &format!("model{k}"),
            &format!("rho_H(Phi, Df) for max of slopes {name}"),
            hausdorff_distance(&phi.set, &df.set)?,
            ctx.tol.phi,
            format!("max std err {:.2e}", phi.max_std_err),
            ms(tk),
        );
    }
    Ok(rows.finish(ms(t)))
}

pub(crate) fn c5_ph2(ctx: &Ctx) -> Result<CriterionOutput> {
    let mut rows = RowSet::new("second-order", "C5", ctx.timing);
    let t = Instant::now();
    let grid = circle_grid(720, 0.0);
    let mut sets: Vec<Vec<DMatrix<f64>>> = vec![vec![
        DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 0.0])),
        DMatrix::from_diagonal(&DVector::from_column_slice(&[0.0, 2.0])),
    ]];
    for i in 0..ctx.budget.ph2_sets {
        let mut rng = stream(path_seed(ctx.seed, &[5, i as u64]));
        sets.push(random_two_generators(&mut rng, 2).to_vec());
    }
    let mut hull = Vec::new();
    let mut psi = Vec::new();
    let mut noisy = 0;
    for (i, mats) in sets.iter().enumerate() {
        let h = ph2_from_matrix_set(mats)?;
        let want = MatrixSet::new(mats)?;
        hull.push(matrix_hausdorff(&estimate_matrix_hull_ph2(&h, &grid)?, &want)?);
        if i < 1 + ctx.budget.psi_sets {
            let cfg = PsiConfig {
                mc: ctx.budget.mc_psi,
                seed: path_seed(ctx.seed, &[5, i as u64, 1]),
                ..PsiConfig::default()
            };
            let est = estimate_psi2(&h, &DVector::zeros(2), &cfg)?;
            noisy += est.noisy as usize;
            psi.push(matrix_hausdorff(&est.set, &want)?);
        }
    }
    let t_hull = ms(t);
    rows.le("diag_hull", "rho_F(hull of Hessians, conv{diag(2,0), diag(0,2)})", hull[0], ctx.tol.ph2, t_hull);
    rows.le("random_hull", "max rho_F(hull of Hessians, conv A) over random sets", worst(hull[1..].iter().copied()), ctx.tol.ph2, 0.0);
    rows.le_flagged(
        "diag_psi2",
        "rho_F(Psi2 by double smoothing, conv{diag(2,0), diag(0,2)})",
        psi[0],
        ctx.tol.psi2,
        String::new(),
        0.0,
    );
    if psi.len() > 1 {
        rows.le_flagged(
            "random_psi2",
            "max rho_F(Psi2 by double smoothing, conv A) over random sets",
            worst(psi[1..].iter().copied()),
            ctx.tol.psi2,
            if noisy > 0 { format!("noisy estimates: {noisy}") } else { String::new() },
            0.0,
        );
    }
    Ok(rows.finish(ms(t)))
}

pub(crate) fn c6_second(ctx: &Ctx) -> Result<CriterionOutput> {
    let mut rows = RowSet::new("second-order", "C6", ctx.timing);
    let t = Instant::now();
    let mut cases: Vec<(MaxMinQuadModel, Vec<DVector<f64>>, Vec<DMatrix<f64>>)> = vec![(
        abs_plus_square()?,
        vec![DVector::from_element(1, -1.0), DVector::from_element(1, 1.0)],
        vec![DMatrix::from_element(1, 1, 2.0)],
    )];
    for i in 0..ctx.budget.composed {
        let mut rng = stream(path_seed(ctx.seed, &[6, i as u64]));
        let c = random_composed(&mut rng)?;
        cases.push((c.model, c.slopes, c.matrices));
    }
    let alpha = 1e-2;
    let out: Vec<(f64, f64, f64)> = cases
        .par_iter()
        .map(|(f, slopes, mats)| {
            let n = f.dim();
            let x = DVector::zeros(n);
            let res = second_hypodiff_algorithm(f, &x, &SecondConfig::default())?;
            let sub = hausdorff_distance(&res.subdiff, &Polytope::new(slopes.clone())?)?;
            let a = matrix_hausdorff(&res.a_set, &MatrixSet::new(mats)?)?;
            let mut r: f64 = 0.0;
            for g in direction_grid(n) {
                r = r.max(second_expansion_residual(f, &x, &res.codiff, alpha, &g)? / (alpha * alpha));
            }
            Ok((sub, a, r))
        })
        .collect::<Result<_>>()?;
    rows.le("subdiff", "max rho_H(lower subdifferential, conv v_i)", worst(out.iter().map(|c| c.0)), ctx.tol.subdiff2, ms(t));
    rows.le("a_set", "max rho_F(A, generator hull)", worst(out.iter().map(|c| c.1)), ctx.tol.a_set, 0.0);
    rows.le("residual", "max residual/alpha^2 at alpha=1e-2", worst(out.iter().map(|c| c.2)), ctx.tol.residual2, 0.0);
    Ok(rows.finish(ms(t)))
}

fn active_slopes(slopes: &[DVector<f64>], x: &DVector<f64>) -> Result<Polytope> {
    let vals: Vec<f64> = slopes.iter().map(|v| v.dot(x)).collect();
    let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Polytope::new(
        slopes
            .iter()
            .zip(&vals)
            .filter(|(_, &v)| best - v <= 1e-12 * scale.max(1e-300))
            .map(|(s, _)| s.clone())
            .collect(),
    )
}

pub(crate) fn c7_codiff(ctx: &Ctx) -> Result<CriterionOutput> {
    let mut rows = RowSet::new("codiff", "C7", ctx.timing);
    let t = Instant::now();
    let build = BuildConfig::default();
    let gs = circle_grid(ctx.budget.directions, 0.0);
    let check_alphas: Vec<f64> = (0..=6).rev().map(|j| 1e-3 * 2f64.powi(j)).collect();

    // (x, model, slopes): the origin, where every piece is active, and a
    // point near a kink
    let mut cases = Vec::new();
    for i in 0..ctx.budget.codiff_models {
        let mut rng = stream(path_seed(ctx.seed, &[7, i as u64]));
        let (f, slopes) = random_max_affine(&mut rng, 2)?;
        let near = crate::rng::unit_vector(&mut rng, 2) * 0.02;
        cases.push((DVector::zeros(2), f.clone(), slopes.clone()));
        cases.push((near, f, slopes));
    }
    let out: Vec<(f64, f64, f64, usize)> = cases
        .par_iter()
        .map(|(x, f, slopes)| {
            let sub = estimate_df(f, x, &build.df)?.set;
            let hypo = build_hypodifferential(f, x, &sub, &build)?;
            let slice = hausdorff_distance(&hypo.zero_slice()?, &active_slopes(slopes, x)?)?;
            let mut at_min: f64 = 0.0;
            let mut violations = 0;
            for g in &gs {
                let ratios = check_alphas
                    .iter()
                    .map(|&a| Ok(expansion_residual(f, x, &hypo, a, g)? / a))
                    .collect::<Result<Vec<f64>>>()?;
                at_min = at_min.max(*ratios.last().expect("nonempty"));
                // ratios below the rounding floor count as zero
                let floor = |r: f64| if r < 1e-10 { 0.0 } else { r };
                violations += ratios.windows(2).filter(|w| floor(w[1]) > floor(w[0])).count();
            }
            Ok((hypo.max_offset().abs(), slice, at_min, violations))
        })
        .collect::<Result<_>>()?;
    rows.le("offset", "max |max offset|", worst(out.iter().map(|c| c.0)), ctx.tol.offset, ms(t));
    rows.le("slice", "max rho_H(zero-offset slice, subdifferential)", worst(out.iter().map(|c| c.1)), ctx.tol.slice, 0.0);
    rows.le(
        "residual",
        &format!("max residual/alpha at alpha=1e-3 over {} directions", gs.len()),
        worst(out.iter().map(|c| c.2)),
        ctx.tol.residual1,
        0.0,
    );
    // cases alternate anchor, near-kink
    let anchor: usize = out.iter().step_by(2).map(|c| c.3).sum();
    let near: usize = out.iter().skip(1).step_by(2).map(|c| c.3).sum();
    rows.le_flagged(
        "monotone",
        "increases of residual/alpha along the decreasing schedule",
        (anchor + near) as f64,
        0.0,
        format!("at anchors: {anchor}, near kinks: {near}"),
        0.0,
    );

    let tp = Instant::now();
    let abs = MaxMinQuadModel::abs_1d();
    let xs = line_grid(&DVector::zeros(1), &DVector::from_element(1, 1.0), 0.1, 0.01)?;
    let profile = continuity_profile(&abs, &xs, &build)?;
    rows.le("hypo_step", "max rho_H(hypo step) on the |x| grid", profile.max_hypo_step(), ctx.tol.hypo_step, ms(tp));
    rows.near(
        "kink_jump",
        "max rho_H(subdifferential step) on the |x| grid",
        profile.max_subdiff_step(),
        2.0,
        ctx.tol.jump,
        0.0,
    );
    let mut output = rows.finish(ms(t));
    output.profiles.push(("continuity_abs".into(), profile));
    Ok(output)
}

pub(crate) fn c8_sawtooth(ctx: &Ctx) -> Result<CriterionOutput> {
    let mut rows = RowSet::new("sawtooth", "C8", ctx.timing);
    let t = Instant::now();
    let f = Sawtooth::new(ctx.budget.sawtooth_depth as u32)?;
    let x0 = DVector::zeros(1);
    let df = estimate_df(&f, &x0, &DfConfig::default())?;
    rows.le("df_radius", "radius of Df(0)", df.set.radius(), ctx.tol.df_radius, ms(t));
    let tc = Instant::now();
    let hull = limit_gradient_hull(&f, &x0, 0.05, ctx.budget.clarke_samples, path_seed(ctx.seed, &[8, 0]))?;
    let lo = hull.vertices().iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
    let hi = hull.vertices().iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
    rows.ge("clarke", "min(-lo, hi) of the limit-gradient hull", (-lo).min(hi), ctx.tol.clarke, ms(tc));
    let to = Instant::now();
    let axis = DVector::from_element(1, 1.0);
    let check = refinement_check(&f, &x0, &axis, 0.02, 0.004, 4, &BuildConfig::default())?;
    rows.ge(
        "oscillation",
        "fine/coarse max hypo step under 4x refinement",
        check.fine_max / check.coarse_max,
        0.5,
        ms(to),
    );
    let mut output = rows.finish(ms(t));
    output.profiles.push(("continuity_sawtooth".into(), check.fine));
    Ok(output)
}
