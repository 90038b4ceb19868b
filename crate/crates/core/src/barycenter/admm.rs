//! Standard ADMM centroid update with one quadratic program per member.

use ndarray::Array2;
use rayon::prelude::*;

use super::{
    check_members, member_costs, objective, product_coupling, rho_from_cost_matrices,
    update_support, Budget, Centroid, SolveStats,
};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::simplex::{project_scaled_simplex, project_simplex};

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmParams {
    pub rho0: f64,
    /// ADMM sweeps between support updates.
    pub t_admm: usize,
    pub outer_iters: usize,
    /// QP stopping tolerance: on the largest entry change per sweep, or on
    /// the duality gap relative to `1 + <C, P>`.
    pub qp_tol: f64,
    /// Sweep cap of the QP solver.
    pub qp_max_iter: usize,
    pub fixed_support: bool,
}

impl Default for AdmmParams {
    fn default() -> Self {
        Self {
            rho0: 2.0,
            t_admm: 10,
            outer_iters: 10,
            qp_tol: 1e-12,
            qp_max_iter: 100_000,
            fixed_support: false,
        }
    }
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0) || self.t_admm == 0 || self.outer_iters == 0 {
            return Err(Error::InvalidParameter(
                "rho0, t_admm and outer_iters must be positive".into(),
            ));
        }
        if !(self.qp_tol > 0.0) || self.qp_max_iter == 0 {
            return Err(Error::InvalidParameter("QP tolerance and cap must be positive".into()));
        }
        Ok(())
    }
}

/// Solves the per-member QP
///
/// `min <C, P> + rho/2 * sum_i (sum_j P_ij - w_i + lambda_i)^2`
///
/// over `P >= 0` with column sums `wk`, by cyclic exact minimization over
/// columns started from `warm`. With the other columns fixed, the optimal
/// column is a Euclidean projection onto a scaled simplex. Stops when a
/// full sweep changes no entry by more than `tol`, or when the
/// Frank-Wolfe gap (an upper bound on the distance to the optimal value)
/// falls below `tol * (1 + <C, P>)`. The second test matters when the
/// optimum is not unique and the iterates drift along the optimal face.
pub fn admm_qp_subproblem(
    cost: &Array2<f64>,
    wk: &[f64],
    w: &[f64],
    lambda: &[f64],
    rho: f64,
    warm: &Array2<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Array2<f64>> {
    let (m, mk) = cost.dim();
    if wk.len() != mk || w.len() != m || lambda.len() != m || warm.dim() != (m, mk) {
        return Err(Error::DimensionMismatch { expected: m * mk, found: warm.len() });
    }
    if !(rho > 0.0) {
        return Err(Error::ZeroRho);
    }
    let target: Vec<f64> = w.iter().zip(lambda).map(|(w, l)| w - l).collect();
    let mut p = warm.clone();
    for (j, mut col) in p.columns_mut().into_iter().enumerate() {
        let proj = project_scaled_simplex(&col.to_vec(), wk[j]);
        col.iter_mut().zip(proj).for_each(|(c, x)| *c = x);
    }
    let mut rows: Vec<f64> = p.rows().into_iter().map(|r| r.sum()).collect();
    let mut v = vec![0.0; m];
    for _ in 0..max_iter {
        let mut change = 0.0f64;
        for j in 0..mk {
            for i in 0..m {
                v[i] = target[i] - (rows[i] - p[[i, j]]) - cost[[i, j]] / rho;
            }
            let q = project_scaled_simplex(&v, wk[j]);
            for (i, qi) in q.into_iter().enumerate() {
                let d = qi - p[[i, j]];
                change = change.max(d.abs());
                rows[i] += d;
                p[[i, j]] = qi;
            }
        }
        if !change.is_finite() {
            return Err(Error::NonFinite("ADMM subproblem"));
        }
        if change <= tol || qp_gap(cost, &p, &rows, &target, wk, rho) <= tol * (1.0 + linear_cost(cost, &p)) {
            return Ok(p);
        }
    }
    Err(Error::QpNoConvergence { iterations: max_iter })
}

fn linear_cost(cost: &Array2<f64>, p: &Array2<f64>) -> f64 {
    cost.iter().zip(p).map(|(c, x)| c * x).sum()
}

/// `<G, P> - sum_j wk_j min_i G_ij` with `G` the QP gradient.
fn qp_gap(cost: &Array2<f64>, p: &Array2<f64>, rows: &[f64], target: &[f64], wk: &[f64], rho: f64) -> f64 {
    let mut gap = 0.0;
    for (j, col) in p.columns().into_iter().enumerate() {
        let mut best = f64::INFINITY;
        for (i, x) in col.iter().enumerate() {
            let g = cost[[i, j]] + rho * (rows[i] - target[i]);
            gap += g * x;
            best = best.min(g);
        }
        gap -= wk[j] * best;
    }
    gap
}

/// Weight step: Euclidean projection of the mean of the `tilde_w` vectors
/// onto the simplex.
pub fn admm_w_update(tilde_w: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = tilde_w.first().ok_or(Error::EmptyInput("ADMM weight inputs"))?;
    let m = first.len();
    let mut mean = vec![0.0; m];
    for v in tilde_w {
        if v.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: v.len() });
        }
        for (a, x) in mean.iter_mut().zip(v) {
            *a += x;
        }
    }
    let n = tilde_w.len() as f64;
    mean.iter_mut().for_each(|a| *a /= n);
    Ok(project_simplex(&mean))
}

#[derive(Debug, Clone)]
pub struct AdmmOutput {
    pub centroid: Centroid,
    pub plans: Vec<Array2<f64>>,
    pub stats: SolveStats,
}

/// Centroid update by standard ADMM. Each outer round resets the duals,
/// refreshes `rho`, runs `t_admm` sweeps of {per-member QP, weight
/// projection, dual step} and then relocates the support.
pub fn admm_centroid<D>(
    members: &[D],
    init: &DiscreteDistribution,
    warm: Option<&[Option<Array2<f64>>]>,
    params: &AdmmParams,
    budget: Budget,
) -> Result<AdmmOutput>
where
    D: AsRef<DiscreteDistribution> + Sync,
{
    params.validate()?;
    check_members(members, init)?;
    let relocate = !(params.fixed_support || init.is_symbolic());
    let mut centroid = init.clone();
    let mut w = init.weights().to_vec();
    let m = w.len();
    let mut plans: Vec<Array2<f64>> = members
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let wk = p.as_ref().weights();
            match warm.and_then(|ws| ws.get(k)).and_then(|o| o.as_ref()) {
                Some(pi) if pi.dim() == (m, wk.len()) => pi.clone(),
                _ => product_coupling(&w, wk),
            }
        })
        .collect();
    let mut stats = SolveStats::default();

    'outer: for _ in 0..params.outer_iters {
        let costs = member_costs(&centroid, members)?;
        let rho = rho_from_cost_matrices(&costs, m, params.rho0);
        if !(rho > 0.0) {
            // all costs vanish: the centroid already sits on every member
            break;
        }
        let mut lambda = vec![vec![0.0; m]; members.len()];
        for _ in 0..params.t_admm {
            plans = (0..members.len())
                .into_par_iter()
                .map(|k| {
                    admm_qp_subproblem(
                        &costs[k],
                        members[k].as_ref().weights(),
                        &w,
                        &lambda[k],
                        rho,
                        &plans[k],
                        params.qp_tol,
                        params.qp_max_iter,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<Vec<f64>> = plans
                .iter()
                .map(|p| p.rows().into_iter().map(|r| r.sum()).collect())
                .collect();
            let tilde: Vec<Vec<f64>> = rows
                .iter()
                .zip(&lambda)
                .map(|(r, l)| r.iter().zip(l).map(|(a, b)| a + b).collect())
                .collect();
            w = admm_w_update(&tilde)?;
            for (l, r) in lambda.iter_mut().zip(&rows) {
                for i in 0..m {
                    l[i] += r[i] - w[i];
                }
            }
            if stats.tick(&budget) {
                break 'outer;
            }
        }
        if relocate {
            let weighted = centroid.with_weights(w.clone())?;
            centroid = update_support(&weighted, members, &plans)?;
        }
    }

    let distribution = DiscreteDistribution::from_parts_normalized(w, centroid.support().clone())?;
    let objective = objective(&distribution, members)?;
    Ok(AdmmOutput {
        centroid: Centroid { distribution, objective },
        plans,
        stats,
    })
}
