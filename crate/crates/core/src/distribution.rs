//! Weighted support-point sets.

use std::sync::Arc;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Square symbol-to-symbol dissimilarity table for symbolic supports.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    id: String,
    costs: Array2<f64>,
}

impl CostTable {
    pub fn new(id: impl Into<String>, costs: Array2<f64>) -> Result<Self> {
        let (r, c) = costs.dim();
        if r != c || r == 0 {
            return Err(Error::InvalidParameter(format!(
                "cost table must be square and non-empty, got {r}x{c}"
            )));
        }
        if costs.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "cost table entries must be finite and non-negative".into(),
            ));
        }
        Ok(Self { id: id.into(), costs })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.costs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.nrows() == 0
    }

    pub fn costs(&self) -> &Array2<f64> {
        &self.costs
    }

    #[inline]
    pub fn cost(&self, a: usize, b: usize) -> f64 {
        self.costs[[a, b]]
    }
}

/// Location of support points: vectors in R^d or symbols of a shared table.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// One row per support point.
    Vectors(Array2<f64>),
    Symbolic {
        table: Arc<CostTable>,
        indices: Vec<usize>,
    },
}

impl Support {
    pub fn len(&self) -> usize {
        match self {
            Support::Vectors(x) => x.nrows(),
            Support::Symbolic { indices, .. } => indices.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A finite discrete probability measure `{(w_i, x_i)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
    support: Support,
}

impl DiscreteDistribution {
    /// Builds a vector-mode distribution from a weight vector and an `m x d`
    /// matrix of support points.
    pub fn new(weights: Vec<f64>, points: Array2<f64>) -> Result<Self> {
        Self::from_parts(weights, Support::Vectors(points))
    }

    /// Builds a distribution from flat row-major coordinates.
    pub fn from_flat(weights: Vec<f64>, dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDistribution("dimension must be >= 1".into()));
        }
        if coords.len() != weights.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: weights.len() * dim,
                found: coords.len(),
            });
        }
        let points = Array2::from_shape_vec((weights.len(), dim), coords)
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Self::new(weights, points)
    }

    pub fn symbolic(weights: Vec<f64>, table: Arc<CostTable>, indices: Vec<usize>) -> Result<Self> {
        Self::from_parts(weights, Support::Symbolic { table, indices })
    }

    /// A unit point mass.
    pub fn point_mass(x: &[f64]) -> Result<Self> {
        Self::from_flat(vec![1.0], x.len(), x.to_vec())
    }

    pub fn from_parts(weights: Vec<f64>, support: Support) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no support points".into()));
        }
        if weights.len() != support.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: support.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        match &support {
            Support::Vectors(x) => {
                if x.ncols() == 0 {
                    return Err(Error::InvalidDistribution("dimension must be >= 1".into()));
                }
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("support points"));
                }
            }
            Support::Symbolic { table, indices } => {
                if let Some(bad) = indices.iter().find(|&&i| i >= table.len()) {
                    return Err(Error::InvalidDistribution(format!(
                        "symbol index {bad} outside table of size {}",
                        table.len()
                    )));
                }
            }
        }
        Ok(Self { weights, support })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    /// Support matrix in vector mode.
    pub fn points(&self) -> Option<&Array2<f64>> {
        match &self.support {
            Support::Vectors(x) => Some(x),
            Support::Symbolic { .. } => None,
        }
    }

    pub fn point(&self, i: usize) -> Option<ArrayView1<'_, f64>> {
        self.points().map(|x| x.row(i))
    }

    /// Dimension of the support vectors; `None` in symbolic mode.
    pub fn dim(&self) -> Option<usize> {
        self.points().map(|x| x.ncols())
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.support, Support::Symbolic { .. })
    }

    /// Weighted mean of the support points.
    pub fn mean(&self) -> Option<Vec<f64>> {
        let x = self.points()?;
        let mut mean = vec![0.0; x.ncols()];
        for (w, row) in self.weights.iter().zip(x.rows()) {
            for (m, v) in mean.iter_mut().zip(row.iter()) {
                *m += w * v;
            }
        }
        Some(mean)
    }

    /// Replaces the weights, keeping the support. The new weights are
    /// validated like in the constructor.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::from_parts(weights, self.support.clone())
    }

    /// Replaces the support points (vector mode only).
    pub fn with_points(&self, points: Array2<f64>) -> Result<Self> {
        Self::from_parts(self.weights.clone(), Support::Vectors(points))
    }

    /// Same measure with weights snapped back onto the simplex by dividing
    /// through their sum. Useful after iterative updates that drift by a few ulps.
    pub(crate) fn from_parts_normalized(mut weights: Vec<f64>, support: Support) -> Result<Self> {
        for w in weights.iter_mut() {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let s: f64 = weights.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::NonFinite("weights"));
        }
        weights.iter_mut().for_each(|w| *w /= s);
        Self::from_parts(weights, support)
    }
}
