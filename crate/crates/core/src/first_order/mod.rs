//! First-order objects: averaged gradients along curves, `Df`, the
//! smoothing subdifferential `Φf`, and quasidifferential pairs recovered from
//! `Df`.

mod curve;
mod df;
mod grids;
mod pairs;
mod smoothing;

pub use curve::{averaged_gradient, AveragedGradient, Curve, Quadrature};
pub use df::{
    directional_derivative, estimate_df, limit_gradient_hull, CurvePolicy, DfConfig, DfEstimate,
    DirectionDiagnostic, Stabilized,
};
pub use grids::{circle_grid, direction_grid, fibonacci_sphere, AlphaSchedule};
pub use pairs::{quasi_difference, quasi_equivalent, recover_pair};
pub(crate) use smoothing::default_point_dirs;
pub use smoothing::{
    estimate_phi, phi_gradient, phi_smooth, phi_smooth_estimate, BallMapFamily, PhiConfig, PhiEstimate, PhiSample,
};
