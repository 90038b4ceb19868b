//! Wasserstein barycenter (centroid) solvers.
//!
//! All solvers minimize the mean squared 2-Wasserstein distance from a
//! centroid with a fixed number of support points to a set of members,
//! alternating weight/coupling updates with the closed-form support update
//! [`update_support`]. The reported objective is always evaluated with exact
//! transport, whatever surrogate the solver optimizes internally.
//!
//! * [`badmm`] modified Bregman ADMM with closed-form coupling updates (default)
//! * [`admm`] standard ADMM with per-member QPs
//! * [`subgrad`] projected subgradient descent on LP duals
//! * [`ibp`] entropic barycenter by iterative Bregman projections
//! * [`fulllp`] full-batch LP alternation, the small-scale accuracy oracle

pub mod admm;
pub mod badmm;
pub mod fulllp;
pub mod ibp;
pub mod subgrad;

use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use crate::distribution::{DiscreteDistribution, Support};
use crate::error::{Error, Result};
use crate::transport::{cost_matrix, wasserstein2_squared};

/// Centroid weights below this keep their previous support location.
pub const ZERO_WEIGHT: f64 = 1e-12;

/// A centroid and its exact objective `(1/N) sum_k W^2(P, P_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroid {
    pub distribution: DiscreteDistribution,
    pub objective: f64,
}

/// Per-member solver state carried over from a previous centroid update.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub coupling: Array2<f64>,
    /// Dual divided by the penalty it was accumulated under; rescaled to the
    /// current penalty on reuse.
    pub scaled_dual: Option<Array2<f64>>,
}

impl WarmStart {
    pub fn coupling(coupling: Array2<f64>) -> Self {
        Self { coupling, scaled_dual: None }
    }
}

/// Optional wall-clock deadline for an iterative solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self { deadline: None }
    }

    pub fn until(deadline: Instant) -> Self {
        Self { deadline: Some(deadline) }
    }

    pub fn exhausted(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Iteration accounting returned by every solver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Iterations that finished before the budget deadline.
    pub within_budget: usize,
}

impl SolveStats {
    pub(crate) fn tick(&mut self, budget: &Budget) -> bool {
        self.iterations += 1;
        if budget.exhausted() {
            true
        } else {
            self.within_budget += 1;
            false
        }
    }
}

/// Exact objective: mean squared W2 from `centroid` to the members.
pub fn objective<D>(centroid: &DiscreteDistribution, members: &[D]) -> Result<f64>
where
    D: AsRef<DiscreteDistribution> + Sync,
{
    if members.is_empty() {
        return Err(Error::EmptyInput("members"));
    }
    let d2 = members
        .par_iter()
        .map(|p| wasserstein2_squared(centroid, p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(d2.iter().sum::<f64>() / members.len() as f64)
}

/// Cost matrices `C(x, x^(k))` between the centroid and every member.
pub fn member_costs<D>(centroid: &DiscreteDistribution, members: &[D]) -> Result<Vec<Array2<f64>>>
where
    D: AsRef<DiscreteDistribution> + Sync,
{
    members
        .par_iter()
        .map(|p| cost_matrix(centroid, p.as_ref(), 2).map(|c| c.into_entries()))
        .collect()
}

/// Penalty scale proportional to the averaged transport cost:
/// `rho = rho0 / (n m) * sum_k sum_ij c(x_i, x_j^(k))` with `n = sum_k m_k`,
/// i.e. `rho0` times the mean entry over all member cost matrices.
pub fn rho_from_costs<D>(members: &[D], centroid: &DiscreteDistribution, rho0: f64) -> Result<f64>
where
    D: AsRef<DiscreteDistribution> + Sync,
{
    if members.is_empty() {
        return Err(Error::EmptyInput("members"));
    }
    let costs = member_costs(centroid, members)?;
    Ok(rho_from_cost_matrices(&costs, centroid.len(), rho0))
}

pub(crate) fn rho_from_cost_matrices(costs: &[Array2<f64>], m: usize, rho0: f64) -> f64 {
    let n: usize = costs.iter().map(|c| c.ncols()).sum();
    let total: f64 = costs.iter().map(|c| c.sum()).sum();
    rho0 * total / (n * m) as f64
}

/// Closed-form support update
/// `x_i = 1/(N w_i) sum_k sum_j pi_ij^(k) x_j^(k)`; weights are unchanged.
///
/// `plans[k]` is the `m x m_k` coupling between the centroid and member `k`.
/// Points whose weight is below [`ZERO_WEIGHT`] keep their location.
pub fn update_support<D>(
    centroid: &DiscreteDistribution,
    members: &[D],
    plans: &[Array2<f64>],
) -> Result<DiscreteDistribution>
where
    D: AsRef<DiscreteDistribution>,
{
    let Support::Vectors(x) = centroid.support() else {
        return Err(Error::SymbolicUnsupported("support update"));
    };
    if members.is_empty() {
        return Err(Error::EmptyInput("members"));
    }
    if plans.len() != members.len() {
        return Err(Error::DimensionMismatch {
            expected: members.len(),
            found: plans.len(),
        });
    }
    let (m, d) = x.dim();
    let mut acc = Array2::<f64>::zeros((m, d));
    for (p, pi) in members.iter().zip(plans) {
        let p = p.as_ref();
        let y = p.points().ok_or(Error::SymbolicUnsupported("support update"))?;
        if y.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: y.ncols() });
        }
        if pi.dim() != (m, y.nrows()) {
            return Err(Error::DimensionMismatch { expected: m * y.nrows(), found: pi.len() });
        }
        acc += &pi.dot(y);
    }
    let n = members.len() as f64;
    let w = centroid.weights();
    let mut out = x.clone();
    for i in 0..m {
        if w[i] >= ZERO_WEIGHT {
            let scale = 1.0 / (n * w[i]);
            for c in 0..d {
                out[[i, c]] = acc[[i, c]] * scale;
            }
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("support update"));
    }
    centroid.with_points(out)
}

/// Product coupling `pi_ij = w_i w_j^(k)`, the cold start for every solver.
pub fn product_coupling(w: &[f64], wk: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((w.len(), wk.len()), |(i, j)| w[i] * wk[j])
}

pub(crate) fn check_members<D: AsRef<DiscreteDistribution>>(
    members: &[D],
    init: &DiscreteDistribution,
) -> Result<()> {
    if members.is_empty() {
        return Err(Error::EmptyInput("members"));
    }
    for p in members {
        let p = p.as_ref();
        match (init.dim(), p.dim()) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::DimensionMismatch { expected: a, found: b })
            }
            (Some(_), None) | (None, Some(_)) => return Err(Error::TableMismatch),
            _ => {}
        }
    }
    Ok(())
}

impl AsRef<DiscreteDistribution> for DiscreteDistribution {
    fn as_ref(&self) -> &DiscreteDistribution {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn d1(w: Vec<f64>, x: Vec<f64>) -> DiscreteDistribution {
        DiscreteDistribution::from_flat(w, 1, x).unwrap()
    }

    #[test]
    fn rho_direct_formula() {
        let member = DiscreteDistribution::point_mass(&[2.0]).unwrap();
        let centroid = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        // c = 4, N = n = m = 1
        assert_eq!(rho_from_costs(&[member], &centroid, 2.0).unwrap(), 8.0);
    }

    #[test]
    fn rho_zero_costs() {
        let p = DiscreteDistribution::point_mass(&[1.0]).unwrap();
        assert_eq!(rho_from_costs(&[p.clone()], &p, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn rho_uniform_unit_costs_equals_rho0() {
        // centroid and members all live on {0, 1} in 2-D unit-distance pairs
        // so that every cross cost equals one.
        let centroid = DiscreteDistribution::point_mass(&[0.0, 0.0]).unwrap();
        let a = DiscreteDistribution::from_flat(vec![0.5, 0.5], 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = DiscreteDistribution::from_flat(vec![0.2, 0.3, 0.5], 2, vec![-1.0, 0.0, 0.0, -1.0, 1.0, 0.0])
            .unwrap();
        let members = [a, b];
        // independent summation oracle
        let mut total = 0.0;
        let mut n = 0;
        for p in &members {
            let y = p.points().unwrap();
            n += y.nrows();
            for r in y.rows() {
                total += r[0] * r[0] + r[1] * r[1];
            }
        }
        let oracle = 2.0 * total / (n * 1) as f64;
        assert_eq!(oracle, 2.0);
        assert_eq!(rho_from_costs(&members, &centroid, 2.0).unwrap(), 2.0);
        assert!(rho_from_costs::<DiscreteDistribution>(&[], &centroid, 2.0).is_err());
    }

    #[test]
    fn support_fixed_point_with_identity_coupling() {
        let p = d1(vec![0.3, 0.7], vec![-1.0, 2.0]);
        let pi = array![[0.3, 0.0], [0.0, 0.7]];
        let out = update_support(&p, &[p.clone()], &[pi]).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn single_point_goes_to_global_mean() {
        let c = DiscreteDistribution::point_mass(&[100.0]).unwrap();
        let a = d1(vec![0.5, 0.5], vec![0.0, 2.0]);
        let b = d1(vec![0.25, 0.75], vec![4.0, 8.0]);
        let plans = [array![[0.5, 0.5]], array![[0.25, 0.75]]];
        let out = update_support(&c, &[a, b], &plans).unwrap();
        // (1 + 7) / 2
        assert_eq!(out.points().unwrap()[[0, 0]], 4.0);
    }

    #[test]
    fn hand_built_two_member_average() {
        let c = d1(vec![0.4, 0.6], vec![0.0, 0.0]);
        let a = d1(vec![0.5, 0.5], vec![1.0, 3.0]);
        let b = d1(vec![0.5, 0.5], vec![-2.0, 6.0]);
        let pa = array![[0.4, 0.0], [0.1, 0.5]];
        let pb = array![[0.3, 0.1], [0.2, 0.4]];
        // independent evaluation, point by point
        let x0 = (0.4 * 1.0 + 0.0 * 3.0 + 0.3 * -2.0 + 0.1 * 6.0) / (2.0 * 0.4);
        let x1 = (0.1 * 1.0 + 0.5 * 3.0 + 0.2 * -2.0 + 0.4 * 6.0) / (2.0 * 0.6);
        let out = update_support(&c, &[a, b], &[pa, pb]).unwrap();
        let x = out.points().unwrap();
        assert!((x[[0, 0]] - x0).abs() < 1e-14);
        assert!((x[[1, 0]] - x1).abs() < 1e-14);
        assert_eq!(out.weights(), c.weights());
    }

    #[test]
    fn zero_weight_point_keeps_location() {
        let c = d1(vec![1.0, 0.0], vec![0.0, 42.0]);
        let a = d1(vec![1.0], vec![5.0]);
        let out = update_support(&c, &[a], &[array![[1.0], [0.0]]]).unwrap();
        assert_eq!(out.points().unwrap().column(0).to_vec(), vec![5.0, 42.0]);
    }
}
