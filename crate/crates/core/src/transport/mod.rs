//! Exact pairwise optimal transport.
//!
//! [`solve_transport`] solves the transportation LP exactly with a
//! transportation simplex and reports the row/column potentials;
//! [`wasserstein2`] wraps it with the squared Euclidean ground cost.

mod cost;
mod network;

use ndarray::Array2;

pub use cost::{cost_matrix, CostMatrix};

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};

/// Marginal masses may differ by at most this much.
pub const MASS_TOL: f64 = 1e-6;

/// An optimal coupling and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub pi: Array2<f64>,
    pub cost: f64,
    /// Potentials of the row-marginal constraints.
    pub row_duals: Vec<f64>,
    /// Potentials of the column-marginal constraints.
    pub col_duals: Vec<f64>,
}

impl TransportPlan {
    /// Dual objective `<u, w_a> + <v, w_b>`.
    pub fn dual_objective(&self, w_a: &[f64], w_b: &[f64]) -> f64 {
        let r: f64 = self.row_duals.iter().zip(w_a).map(|(u, w)| u * w).sum();
        let c: f64 = self.col_duals.iter().zip(w_b).map(|(v, w)| v * w).sum();
        r + c
    }
}

/// Exact solution of the transportation LP with marginals `w_a` (rows) and
/// `w_b` (columns).
pub fn solve_transport(c: &CostMatrix, w_a: &[f64], w_b: &[f64]) -> Result<TransportPlan> {
    solve_dense(c.entries(), w_a, w_b)
}

pub(crate) fn solve_dense(c: &Array2<f64>, w_a: &[f64], w_b: &[f64]) -> Result<TransportPlan> {
    let (m, n) = c.dim();
    if w_a.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: w_a.len() });
    }
    if w_b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w_b.len() });
    }
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput("transport marginals"));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cost matrix"));
    }
    if w_a.iter().chain(w_b).any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidDistribution("marginals must be non-negative".into()));
    }
    let sa: f64 = w_a.iter().sum();
    let sb: f64 = w_b.iter().sum();
    if (sa - sb).abs() > MASS_TOL {
        return Err(Error::InfeasibleMarginals { left: sa, right: sb });
    }
    // absorb the sub-tolerance mismatch into the column side
    let demand: Vec<f64> = if sa == sb || sb == 0.0 {
        w_b.to_vec()
    } else {
        w_b.iter().map(|w| w * sa / sb).collect()
    };

    let sol = network::solve(c, w_a, &demand)?;
    let cost = sol
        .flow
        .iter()
        .zip(c.iter())
        .map(|(p, c)| p * c)
        .sum::<f64>();
    Ok(TransportPlan {
        pi: sol.flow,
        cost,
        row_duals: sol.row_duals,
        col_duals: sol.col_duals,
    })
}

/// Squared 2-Wasserstein distance.
pub fn wasserstein2_squared(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Result<f64> {
    let c = cost_matrix(a, b, 2)?;
    Ok(solve_transport(&c, a.weights(), b.weights())?.cost.max(0.0))
}

/// 2-Wasserstein distance `sqrt(min <C, P>)` under squared Euclidean cost
/// (or the table cost for symbolic supports).
pub fn wasserstein2(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Result<f64> {
    wasserstein2_squared(a, b).map(f64::sqrt)
}
