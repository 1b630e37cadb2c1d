use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::hull;
use crate::error::{check_dim, Error, Result};

/// Tolerance for irredundancy pruning and support-function ties.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// A convex compact set stored as the irredundant vertex list of a polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<DVector<f64>>,
}

/// Value of the support function and the maximizing vertices.
#[derive(Clone, Debug)]
pub struct Support {
    pub value: f64,
    /// Indices into [`Polytope::vertices`] within tie tolerance of the max.
    pub active: Vec<usize>,
}

impl Support {
    /// The gradient of the support function, if it exists at this direction.
    pub fn unique(&self) -> Option<usize> {
        match self.active.as_slice() {
            [i] => Some(*i),
            _ => None,
        }
    }
}

impl Polytope {
    /// Convex hull of `points`, pruned to its vertices.
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self> {
        Self::with_tolerance(points, GEOMETRY_TOL)
    }

    pub fn with_tolerance(points: Vec<DVector<f64>>, tol: f64) -> Result<Self> {
        let dim = validate(&points)?;
        let scale = points
            .iter()
            .map(|p| p.amax())
            .fold(1.0_f64, f64::max);
        let vertices = hull::extreme_points(&points, tol * scale);
        Ok(Self { dim, vertices })
    }

    /// Wraps a vertex list without pruning. The caller guarantees irredundancy.
    pub fn from_vertices_unchecked(vertices: Vec<DVector<f64>>) -> Result<Self> {
        let dim = validate(&vertices)?;
        Ok(Self { dim, vertices })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| DVector::from_vec(r.clone())).collect())
    }

    pub fn point(p: DVector<f64>) -> Self {
        let dim = p.len();
        Self {
            dim,
            vertices: vec![p],
        }
    }

    pub fn origin(dim: usize) -> Self {
        Self::point(DVector::zeros(dim))
    }

    /// The interval `[lo, hi]` on the real line.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::new(vec![DVector::from_element(1, lo), DVector::from_element(1, hi)])
            .expect("interval endpoints are one-dimensional")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `max_{v} (v, q)` together with the maximizing vertices.
    pub fn support(&self, q: &DVector<f64>) -> Result<Support> {
        self.support_with_tol(q, GEOMETRY_TOL)
    }

    pub fn support_with_tol(&self, q: &DVector<f64>, tie_tol: f64) -> Result<Support> {
        check_dim(self.dim, q.len())?;
        if q.norm() == 0.0 || !q.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("support direction must be nonzero and finite"));
        }
        let dots: Vec<f64> = self.vertices.iter().map(|v| v.dot(q)).collect();
        let value = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = tie_tol * value.abs().max(q.norm());
        let active = dots
            .iter()
            .enumerate()
            .filter(|(_, &d)| value - d <= slack)
            .map(|(i, _)| i)
            .collect();
        Ok(Support { value, active })
    }

    /// Support value only; `q` may be zero.
    pub fn support_value(&self, q: &DVector<f64>) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(q))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn negate(&self) -> Self {
        Self {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| -v).collect(),
        }
    }

    pub fn translate(&self, t: &DVector<f64>) -> Self {
        Self {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v + t).collect(),
        }
    }

    /// Euclidean distance from `p` to the hull; zero iff `p` is inside.
    pub fn distance_to(&self, p: &DVector<f64>) -> f64 {
        hull::distance_to_hull(p, &self.vertices)
    }

    pub fn contains(&self, p: &DVector<f64>, tol: f64) -> bool {
        self.distance_to(p) <= tol
    }

    pub fn centroid(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    /// Largest distance of a vertex from the origin.
    pub fn radius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.iter().copied().collect()).collect()
    }
}

fn validate(points: &[DVector<f64>]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("a polytope needs at least one vertex"))?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::invalid("polytope dimension must be positive"));
    }
    for p in points {
        check_dim(dim, p.len())?;
        if !p.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("polytope vertices must be finite"));
        }
    }
    Ok(dim)
}

/// Wire form: `{"dim": n, "vertices": [[...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeDoc {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
}

impl From<&Polytope> for PolytopeDoc {
    fn from(p: &Polytope) -> Self {
        PolytopeDoc {
            dim: p.dim,
            vertices: p.to_rows(),
        }
    }
}

impl TryFrom<PolytopeDoc> for Polytope {
    type Error = Error;

    fn try_from(doc: PolytopeDoc) -> Result<Self> {
        for (i, row) in doc.vertices.iter().enumerate() {
            if row.len() != doc.dim {
                return Err(Error::Parse {
                    context: format!("vertices[{i}]"),
                    message: format!("expected {} coordinates, found {}", doc.dim, row.len()),
                });
            }
        }
        Polytope::from_rows(&doc.vertices)
    }
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PolytopeDoc::deserialize(d)?;
        Polytope::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// A pair of convex compacts of equal dimension, such as a quasidifferential.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SetPair {
    pub lower: Polytope,
    pub upper: Polytope,
}

impl SetPair {
    pub fn new(lower: Polytope, upper: Polytope) -> Result<Self> {
        check_dim(lower.dim(), upper.dim())?;
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }
}
