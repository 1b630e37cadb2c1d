use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::function_models::Objective;
use crate::rng::{stream, unit_vector};

/// `r(α) = x₀ + αg + α²p` for `0 < α ≤ α₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub base: DVector<f64>,
    pub direction: DVector<f64>,
    pub bend: DVector<f64>,
    pub alpha_max: f64,
}

impl Curve {
    pub fn new(base: DVector<f64>, direction: DVector<f64>, bend: DVector<f64>, alpha_max: f64) -> Result<Self> {
        check_dim(base.len(), direction.len())?;
        check_dim(base.len(), bend.len())?;
        if (direction.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "curve direction must be a unit vector, norm is {}",
                direction.norm()
            )));
        }
        if !(alpha_max > 0.0 && alpha_max.is_finite()) {
            return Err(Error::invalid("curve validity radius must be positive"));
        }
        Ok(Self {
            base,
            direction,
            bend,
            alpha_max,
        })
    }

    pub fn line(base: DVector<f64>, direction: DVector<f64>, alpha_max: f64) -> Result<Self> {
        let n = base.len();
        Self::new(base, direction, DVector::zeros(n), alpha_max)
    }

    pub fn is_line(&self) -> bool {
        self.bend.iter().all(|&c| c == 0.0)
    }

    pub fn point(&self, alpha: f64) -> DVector<f64> {
        &self.base + &self.direction * alpha + &self.bend * (alpha * alpha)
    }

    /// Bound on `‖o_r′(τ)‖` over the validity interval.
    pub fn derivative_bound(&self) -> f64 {
        2.0 * self.alpha_max * self.bend.norm()
    }
}

/// Quadrature settings for averaged gradients.
#[derive(Clone, Debug)]
pub struct Quadrature {
    /// Composite midpoint nodes when breakpoints are not available.
    pub nodes: usize,
    /// Size of the shift applied at nondifferentiable nodes; grown by a factor
    /// 1000 (at most three times) while the shifted node is still tied.
    pub perturb: f64,
    /// Split line integrals at the objective's breakpoints and integrate each
    /// piece with two-point Gauss rules. Exact when the gradient is affine
    /// between breakpoints.
    pub use_breakpoints: bool,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            nodes: 512,
            perturb: 1e-12,
            use_breakpoints: true,
        }
    }
}

/// `α⁻¹ ∫₀^α ∇f(r(τ)) dτ` with a bound on the quadrature error.
#[derive(Clone, Debug)]
pub struct AveragedGradient {
    pub value: DVector<f64>,
    pub error_bound: f64,
}

fn gradient_near<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    perturb: f64,
    salt: u64,
) -> Result<DVector<f64>> {
    match f.gradient(x) {
        Ok(g) => Ok(g),
        Err(Error::NonDifferentiable { .. }) => {
            let mut rng = stream(0xA5A5_0000 ^ salt);
            let u = unit_vector(&mut rng, x.len());
            // a shift below the tie tolerance leaves the point tied, so grow it
            let mut scale = perturb * x.amax().max(1.0);
            let mut last = None;
            for _ in 0..4 {
                match f.gradient(&(x + &u * scale)) {
                    Ok(g) => return Ok(g),
                    Err(e @ Error::NonDifferentiable { .. }) => last = Some(e),
                    Err(e) => return Err(e),
                }
                scale *= 1e3;
            }
            Err(last.expect("loop ran"))
        }
        Err(e) => Err(e),
    }
}

pub fn averaged_gradient<F: Objective + ?Sized>(
    f: &F,
    curve: &Curve,
    alpha: f64,
    quad: &Quadrature,
) -> Result<AveragedGradient> {
    check_dim(f.dim(), curve.base.len())?;
    if !(alpha > 0.0) || alpha > curve.alpha_max * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "averaging length {alpha} outside (0, {}]",
            curve.alpha_max
        )));
    }
    let n = f.dim();
    if quad.use_breakpoints && curve.is_line() {
        let end = curve.point(alpha);
        if let Some(ts) = f.breakpoints(&curve.base, &end) {
            let mut cuts = Vec::with_capacity(ts.len() + 2);
            cuts.push(0.0);
            cuts.extend(ts.into_iter().filter(|t| *t > 0.0 && *t < 1.0));
            cuts.push(1.0);
            let h = 0.5 / 3f64.sqrt();
            let mut acc = DVector::zeros(n);
            for (k, w) in cuts.windows(2).enumerate() {
                let (lo, hi) = (w[0], w[1]);
                let len = hi - lo;
                if len <= 0.0 {
                    continue;
                }
                let mid = 0.5 * (lo + hi);
                for (s, t) in [(0u64, mid - h * len), (1, mid + h * len)] {
                    let x = curve.point(alpha * t);
                    acc += gradient_near(f, &x, quad.perturb, (k as u64) << 1 | s)? * (0.5 * len);
                }
            }
            return Ok(AveragedGradient {
                value: acc,
                error_bound: 0.0,
            });
        }
    }
    let m = quad.nodes.max(1);
    let mut acc = DVector::zeros(n);
    for i in 0..m {
        let t = alpha * (i as f64 + 0.5) / m as f64;
        acc += gradient_near(f, &curve.point(t), quad.perturb, i as u64)?;
    }
    Ok(AveragedGradient {
        value: acc / m as f64,
        error_bound: 2.0 * f.lipschitz_hint() / m as f64,
    })
}
