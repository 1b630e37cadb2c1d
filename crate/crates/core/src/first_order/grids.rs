use nalgebra::DVector;

use crate::rng::{stream, unit_vector};

/// `count` equally spaced unit vectors in the plane starting at angle `phase`.
pub fn circle_grid(count: usize, phase: f64) -> Vec<DVector<f64>> {
    (0..count)
        .map(|k| {
            let t = phase + std::f64::consts::TAU * k as f64 / count as f64;
            DVector::from_vec(vec![t.cos(), t.sin()])
        })
        .collect()
}

/// Fibonacci lattice on the unit sphere in R³.
pub fn fibonacci_sphere(count: usize) -> Vec<DVector<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * k as f64;
            DVector::from_vec(vec![r * t.cos(), r * t.sin(), z])
        })
        .collect()
}

/// The default direction grid: `{±1}` on the line, 720 angles in the plane,
/// 2000 Fibonacci points in space, and seeded random directions beyond.
pub fn direction_grid(dim: usize) -> Vec<DVector<f64>> {
    match dim {
        1 => vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        2 => circle_grid(720, 0.0),
        3 => fibonacci_sphere(2000),
        d => {
            let mut rng = stream(0xD1_5EED ^ d as u64);
            (0..1000 * d).map(|_| unit_vector(&mut rng, d)).collect()
        }
    }
}

/// A decreasing sequence of averaging lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSchedule {
    alphas: Vec<f64>,
}

impl AlphaSchedule {
    /// `α_k = α₀ · 2^-k` for `k = 0..=levels`.
    pub fn geometric(alpha0: f64, levels: usize) -> Self {
        Self {
            alphas: (0..=levels).map(|k| alpha0 * 0.5f64.powi(k as i32)).collect(),
        }
    }

    /// `alphas` must be positive and strictly decreasing.
    pub fn from_values(alphas: Vec<f64>) -> crate::Result<Self> {
        if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0)) || alphas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(crate::Error::invalid(
                "schedule must be nonempty, positive and strictly decreasing",
            ));
        }
        Ok(Self { alphas })
    }

    pub fn values(&self) -> &[f64] {
        &self.alphas
    }

    pub fn largest(&self) -> f64 {
        self.alphas[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.alphas.last().expect("nonempty")
    }
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        Self::geometric(0.1, 20)
    }
}
