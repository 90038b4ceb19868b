//! Subgradient descent on the centroid weights.
//!
//! The weights are reparametrized as `w = softmax(s)`. Each iteration solves
//! the N exact transport problems, reads the subgradient of each squared
//! distance w.r.t. the centroid weights from the LP row potentials, and steps
//! in `s` with a normalized step size `min(alpha / ||grad_s||, zeta)`.

use ndarray::Array2;
use rayon::prelude::*;

use super::{check_members, member_costs, objective, update_support, Budget, Centroid, SolveStats};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::simplex::softmax;
use crate::transport::{solve_dense, TransportPlan};

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradParams {
    pub alpha: f64,
    /// Cap on the step multiplier; zero freezes the weights.
    pub zeta: f64,
    /// Support update period in iterations.
    pub tau: usize,
    pub iters: usize,
    pub fixed_support: bool,
}

impl Default for SubgradParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            zeta: 10.0,
            tau: 1,
            iters: 10,
            fixed_support: false,
        }
    }
}

impl SubgradParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !(self.zeta >= 0.0) || self.tau == 0 || self.iters == 0 {
            return Err(Error::InvalidParameter(
                "alpha, tau and iters must be positive and zeta non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Projected subgradient of one squared distance w.r.t. the centroid
/// weights: `lambda - (sum_i lambda_i) * 1`.
pub fn projected_subgradient(row_duals: &[f64]) -> Vec<f64> {
    let s: f64 = row_duals.iter().sum();
    row_duals.iter().map(|l| l - s).collect()
}

/// Chain rule through the softmax: `d/ds_j = w_j (g_j - <g, w>)`.
pub fn softmax_gradient(g: &[f64], w: &[f64]) -> Vec<f64> {
    let gw: f64 = g.iter().zip(w).map(|(a, b)| a * b).sum();
    g.iter().zip(w).map(|(gi, wi)| wi * (gi - gw)).collect()
}

#[derive(Debug, Clone)]
pub struct SubgradOutput {
    pub centroid: Centroid,
    pub plans: Vec<Array2<f64>>,
    pub stats: SolveStats,
}

pub fn subgrad_centroid<D>(
    members: &[D],
    init: &DiscreteDistribution,
    params: &SubgradParams,
    budget: Budget,
) -> Result<SubgradOutput>
where
    D: AsRef<DiscreteDistribution> + Sync,
{
    params.validate()?;
    check_members(members, init)?;
    if init.weights().iter().any(|w| *w <= 0.0) {
        return Err(Error::InvalidParameter(
            "subgradient descent needs strictly positive initial weights".into(),
        ));
    }
    let relocate = !(params.fixed_support || init.is_symbolic());
    let mut s: Vec<f64> = init.weights().iter().map(|w| w.ln()).collect();
    recenter(&mut s);
    let mut centroid = init.clone();
    let mut w = init.weights().to_vec();
    let mut plans = Vec::new();
    let mut stats = SolveStats::default();
    let n = members.len() as f64;

    for it in 1..=params.iters {
        let costs = member_costs(&centroid, members)?;
        let sols: Vec<TransportPlan> = (0..members.len())
            .into_par_iter()
            .map(|k| solve_dense(&costs[k], &w, members[k].as_ref().weights()))
            .collect::<Result<Vec<_>>>()?;

        let mut g = vec![0.0; w.len()];
        for sol in &sols {
            for (a, v) in g.iter_mut().zip(projected_subgradient(&sol.row_duals)) {
                *a += v / n;
            }
        }
        plans = sols.into_iter().map(|p| p.pi).collect();

        if relocate && it % params.tau == 0 {
            let weighted = centroid.with_weights(w.clone())?;
            centroid = update_support(&weighted, members, &plans)?;
        }

        let grad_s = softmax_gradient(&g, &w);
        let norm = grad_s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let sigma = (params.alpha / norm).min(params.zeta);
            for (si, gi) in s.iter_mut().zip(&grad_s) {
                *si -= sigma * gi;
            }
            recenter(&mut s);
            w = softmax(&s);
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("subgradient step"));
        }
        if stats.tick(&budget) {
            break;
        }
    }

    let distribution = DiscreteDistribution::from_parts_normalized(w, centroid.support().clone())?;
    let objective = objective(&distribution, members)?;
    Ok(SubgradOutput {
        centroid: Centroid { distribution, objective },
        plans,
        stats,
    })
}

fn recenter(s: &mut [f64]) {
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    s.iter_mut().for_each(|v| *v -= mean);
}
