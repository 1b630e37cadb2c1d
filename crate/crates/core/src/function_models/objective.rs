use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A Lipschitz function with almost-everywhere derivatives.
///
/// `gradient` and `hessian` may fail at nondifferentiable points; callers that
/// integrate treat those as measure-zero events.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>>;

    fn hessian(&self, _x: &DVector<f64>) -> Result<DMatrix<f64>> {
        Err(Error::Unsupported("hessian"))
    }

    /// Parameters `t ∈ (0, 1)` where the derivative may jump along the
    /// segment `from → to`, if the objective knows them. Between consecutive
    /// breakpoints the gradient is a polynomial of degree at most one in `t`.
    fn breakpoints(&self, _from: &DVector<f64>, _to: &DVector<f64>) -> Option<Vec<f64>> {
        None
    }

    /// A rough Lipschitz scale near the region of interest; used to scale
    /// stabilization tolerances.
    fn lipschitz_hint(&self) -> f64 {
        1.0
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        (**self).hessian(x)
    }
    fn breakpoints(&self, from: &DVector<f64>, to: &DVector<f64>) -> Option<Vec<f64>> {
        (**self).breakpoints(from, to)
    }
    fn lipschitz_hint(&self) -> f64 {
        (**self).lipschitz_hint()
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        (**self).hessian(x)
    }
    fn breakpoints(&self, from: &DVector<f64>, to: &DVector<f64>) -> Option<Vec<f64>> {
        (**self).breakpoints(from, to)
    }
    fn lipschitz_hint(&self) -> f64 {
        (**self).lipschitz_hint()
    }
}

/// A black-box objective from an evaluation callback and a gradient callback.
///
/// The caller is responsible for the gradient existing almost everywhere along
/// the curves used by the estimators.
pub struct FnObjective<F, G> {
    dim: usize,
    value: F,
    gradient: G,
    lipschitz: f64,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&DVector<f64>) -> f64 + Send + Sync,
    G: Fn(&DVector<f64>) -> Option<DVector<f64>> + Send + Sync,
{
    pub fn new(dim: usize, value: F, gradient: G) -> Self {
        Self {
            dim,
            value,
            gradient,
            lipschitz: 1.0,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = l;
        self
    }
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&DVector<f64>) -> f64 + Send + Sync,
    G: Fn(&DVector<f64>) -> Option<DVector<f64>> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        (self.gradient)(x).ok_or_else(|| Error::NonDifferentiable {
            point: x.iter().copied().collect(),
        })
    }

    fn lipschitz_hint(&self) -> f64 {
        self.lipschitz
    }
}
