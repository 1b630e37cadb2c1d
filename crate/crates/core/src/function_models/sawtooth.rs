use nalgebra::DVector;

use super::objective::Objective;
use crate::error::{Error, Result};

/// A continuous piecewise-affine function of one variable, stored as sorted
/// knots with the function values at the knots. Outside the knot range the
/// end segments are extended linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear1D {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PiecewiseLinear1D {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::invalid(
                "need at least two knots and one value per knot",
            ));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("knots must be strictly increasing"));
        }
        let slopes = knots
            .windows(2)
            .zip(values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
            .collect();
        Ok(Self { knots, values, slopes })
    }

    /// Like [`new`](Self::new) with slopes supplied exactly instead of
    /// recomputed from rounded values.
    pub fn with_slopes(knots: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let mut pl = Self::new(knots, values)?;
        if slopes.len() + 1 != pl.knots.len() {
            return Err(Error::invalid("need one slope per segment"));
        }
        pl.slopes = slopes;
        Ok(pl)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index `i` of the segment `[knots[i], knots[i+1]]` holding `x`.
    fn segment(&self, x: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub fn slope_of_segment(&self, i: usize) -> f64 {
        self.slopes[i]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        self.values[i] + self.slope_of_segment(i) * (x - self.knots[i])
    }

    /// The derivative, or `None` at an interior knot where the slope jumps.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        let i = self.segment(x);
        let s = self.slope_of_segment(i);
        let at_knot = |k: usize| k > 0 && k + 1 < self.knots.len() && x == self.knots[k];
        if at_knot(i) && self.slope_of_segment(i - 1) != s {
            return None;
        }
        if at_knot(i + 1) && self.slope_of_segment(i + 1) != s {
            return None;
        }
        Some(s)
    }

    /// Interior knots strictly between `lo` and `hi`.
    pub fn knots_between(&self, lo: f64, hi: f64) -> &[f64] {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let start = self.knots.partition_point(|&k| k <= lo);
        let end = self.knots.partition_point(|&k| k < hi);
        &self.knots[start..end.max(start)]
    }
}

/// The zigzag of slope ±1 trapped between `−x²` and `x²`.
///
/// For `x ≥ 1/2` the graph is the tangent line `x − 1/4` of the upper
/// parabola. Walking left from the tangency point, each tooth follows a line
/// of slope `±1` until it meets the opposite parabola; the meeting point of
/// a line through `(x, ±x²)` with `∓t²` is
/// `t = (−1 + √(1 + 4x(1 − x))) / 2`. The function is odd.
///
/// The teeth accumulate at the origin. Once a tooth would end inside
/// `2^-depth` the current tooth is run down to zero instead and the function
/// is identically zero on the remaining core `[−c, c]`, see
/// [`Sawtooth::core_radius`]. On the core the slope is 0 rather than ±1.
#[derive(Clone, Debug)]
pub struct Sawtooth {
    depth: u32,
    core: f64,
    pl: PiecewiseLinear1D,
}

fn next_contact(x: f64) -> f64 {
    // solves t² + t = x − x²; written to avoid cancellation for small x
    let c = x * (1.0 - x);
    2.0 * c / (1.0 + (1.0 + 4.0 * c).sqrt())
}

impl Sawtooth {
    pub fn new(depth: u32) -> Result<Self> {
        if depth == 0 {
            return Err(Error::invalid("sawtooth depth must be at least 1"));
        }
        if depth > 40 {
            return Err(Error::invalid("sawtooth depth above 40 is not representable"));
        }
        let r = 0.5_f64.powi(depth as i32);
        // knots for x > 0, walking towards the origin
        // contact points (x, f(x)) for x > 0, walking towards the origin; the
        // tangency point 1/2 is not a kink and gets no knot
        let mut pos = vec![(1.0, 0.75)];
        let (mut x, mut upper) = (0.5, true);
        loop {
            let t = next_contact(x);
            if t <= r {
                // run the current tooth down to the axis
                pos.push((x - x * x, 0.0));
                break;
            }
            upper = !upper;
            pos.push((t, if upper { t * t } else { -t * t }));
            x = t;
        }
        let core = pos.last().expect("nonempty").0;
        // a segment ending on the upper parabola rises with slope +1
        let right_slope: Vec<f64> = pos[..pos.len() - 1]
            .iter()
            .map(|p| if p.1 > 0.0 { 1.0 } else { -1.0 })
            .collect();
        let mut knots: Vec<f64> = pos.iter().map(|p| -p.0).collect();
        let mut values: Vec<f64> = pos.iter().map(|p| -p.1).collect();
        let mut slopes = right_slope.clone();
        slopes.push(0.0);
        slopes.extend(right_slope.iter().rev());
        for &(x, y) in pos.iter().rev() {
            knots.push(x);
            values.push(y);
        }
        Ok(Self {
            depth,
            core,
            pl: PiecewiseLinear1D::with_slopes(knots, values, slopes)?,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Half-width of the flat core around the origin.
    pub fn core_radius(&self) -> f64 {
        self.core
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pl.eval(x)
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        self.pl.derivative(x)
    }

    pub fn piecewise(&self) -> &PiecewiseLinear1D {
        &self.pl
    }
}

/// Depth used by the harness and the guide.
pub const DEFAULT_SAWTOOTH_DEPTH: u32 = 12;

pub fn sawtooth_example(depth: u32) -> Result<Sawtooth> {
    Sawtooth::new(depth)
}

impl Objective for PiecewiseLinear1D {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.eval(x[0])
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.derivative(x[0])
            .map(|s| DVector::from_element(1, s))
            .ok_or_else(|| Error::NonDifferentiable { point: vec![x[0]] })
    }

    fn breakpoints(&self, from: &DVector<f64>, to: &DVector<f64>) -> Option<Vec<f64>> {
        let (a, b) = (from[0], to[0]);
        if a == b {
            return Some(Vec::new());
        }
        let mut ts: Vec<f64> = self
            .knots_between(a, b)
            .iter()
            .map(|&k| (k - a) / (b - a))
            .collect();
        ts.sort_by(f64::total_cmp);
        Some(ts)
    }

    fn lipschitz_hint(&self) -> f64 {
        (0..self.knots.len() - 1)
            .map(|i| self.slope_of_segment(i).abs())
            .fold(0.0, f64::max)
    }
}

impl Objective for Sawtooth {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.pl.value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.pl.gradient(x)
    }
    fn breakpoints(&self, from: &DVector<f64>, to: &DVector<f64>) -> Option<Vec<f64>> {
        self.pl.breakpoints(from, to)
    }
    fn lipschitz_hint(&self) -> f64 {
        1.0
    }
}
