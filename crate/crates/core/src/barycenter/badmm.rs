//! Modified Bregman ADMM centroid update.
//!
//! Each member `k` carries two split copies of its coupling: `pi1` lives in
//! the set with column marginals `w^(k)` and `pi2` in the set with row
//! marginals `w` (the centroid weights). Both KL-proximal subproblems have
//! multiplicative closed forms. The centroid weights are chosen by a
//! consensus over the per-member normalized row masses, and `lambda`
//! accumulates `rho * (pi1 - pi2)`.
//!
//! Per-member work runs in parallel; every cross-member reduction is done
//! sequentially in member order so results do not depend on the worker count.

use ndarray::{Array2, Zip};
use rayon::prelude::*;

use super::{
    check_members, member_costs, objective, product_coupling, rho_from_cost_matrices,
    update_support, Budget, Centroid, SolveStats, WarmStart,
};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::simplex::normalize;

/// Early-stop threshold on `max(primal, dual)` residual.
pub const RESIDUAL_STOP: f64 = 1e-8;

/// How per-member row masses are combined into centroid weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConsensusRule {
    /// Arithmetic mean.
    #[default]
    R1,
    /// Mean of square roots, squared.
    R2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BadmmParams {
    pub rho0: f64,
    /// Support relocation period in iterations.
    pub tau: usize,
    pub inner_iters: usize,
    pub rule: ConsensusRule,
    /// Additive floor `eps` in the multiplicative updates.
    pub float_floor: f64,
    /// Keep the support points where they are (always true for symbolic data).
    pub fixed_support: bool,
}

impl Default for BadmmParams {
    fn default() -> Self {
        Self {
            rho0: 2.0,
            tau: 10,
            inner_iters: 100,
            rule: ConsensusRule::R1,
            float_floor: 1e-16,
            fixed_support: false,
        }
    }
}

impl BadmmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return Err(Error::InvalidParameter("rho0 must be positive".into()));
        }
        if self.tau == 0 || self.inner_iters == 0 {
            return Err(Error::InvalidParameter("tau and inner_iters must be positive".into()));
        }
        if !(self.float_floor > 0.0) {
            return Err(Error::InvalidParameter("float_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Split couplings and scaled duals for every member.
#[derive(Debug, Clone, PartialEq)]
pub struct BadmmState {
    pub pi1: Vec<Array2<f64>>,
    pub pi2: Vec<Array2<f64>>,
    pub lambda: Vec<Array2<f64>>,
    pub rho: f64,
    pub eps: f64,
}

impl BadmmState {
    /// Cold or warm start: `pi2` and the dual from `warm` where given and
    /// correctly shaped, otherwise the product coupling and a zero dual;
    /// `pi1 = pi2`.
    pub fn new<D: AsRef<DiscreteDistribution>>(
        w: &[f64],
        members: &[D],
        warm: Option<&[Option<WarmStart>]>,
        rho: f64,
        eps: f64,
    ) -> Self {
        let m = w.len();
        let mut pi2 = Vec::with_capacity(members.len());
        let mut lambda = Vec::with_capacity(members.len());
        for (k, p) in members.iter().enumerate() {
            let wk = p.as_ref().weights();
            let dim = (m, wk.len());
            match warm.and_then(|ws| ws.get(k)).and_then(|o| o.as_ref()) {
                Some(ws) if ws.coupling.dim() == dim => {
                    pi2.push(ws.coupling.clone());
                    lambda.push(match &ws.scaled_dual {
                        Some(l) if l.dim() == dim => l * rho,
                        _ => Array2::zeros(dim),
                    });
                }
                _ => {
                    pi2.push(product_coupling(w, wk));
                    lambda.push(Array2::zeros(dim));
                }
            }
        }
        Self {
            pi1: pi2.clone(),
            pi2,
            lambda,
            rho,
            eps,
        }
    }

    /// Couplings and scaled duals to warm-start a later run.
    pub fn warm_starts(&self) -> Vec<WarmStart> {
        self.pi2
            .iter()
            .zip(&self.lambda)
            .map(|(p, l)| WarmStart {
                coupling: p.clone(),
                scaled_dual: (self.rho > 0.0).then(|| l / self.rho),
            })
            .collect()
    }
}

/// Primal `||pi1 - pi2||` and dual `||pi2_new - pi2_old||` residuals per
/// iteration (Frobenius norms over all members).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualTrace {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BadmmOutput {
    pub centroid: Centroid,
    pub state: BadmmState,
    pub trace: ResidualTrace,
    pub stats: SolveStats,
}

fn member_pi1(pi2: &Array2<f64>, lambda: &Array2<f64>, cost: &Array2<f64>, wk: &[f64], rho: f64, eps: f64) -> Result<Array2<f64>> {
    let mut t = Array2::zeros(pi2.dim());
    Zip::from(&mut t)
        .and(pi2)
        .and(lambda)
        .and(cost)
        .for_each(|t, &p, &l, &c| *t = p * (-(c + l) / rho).exp() + eps);
    for (j, mut col) in t.columns_mut().into_iter().enumerate() {
        let s = col.sum();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::NonFinite("B-ADMM pi1 update"));
        }
        let f = wk[j] / s;
        col.mapv_inplace(|v| v * f);
    }
    Ok(t)
}

fn member_tilde1(pi1: &Array2<f64>, lambda: &Array2<f64>, rho: f64, eps: f64) -> Result<Array2<f64>> {
    let mut t = Array2::zeros(pi1.dim());
    Zip::from(&mut t)
        .and(pi1)
        .and(lambda)
        .for_each(|t, &p, &l| *t = p * (l / rho).exp() + eps);
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("B-ADMM pi2 update"));
    }
    Ok(t)
}

fn member_pi2(tilde: &Array2<f64>, w: &[f64]) -> Array2<f64> {
    let mut p = tilde.clone();
    for (i, mut row) in p.rows_mut().into_iter().enumerate() {
        let f = w[i] / row.sum();
        row.mapv_inplace(|v| v * f);
    }
    p
}

/// Closed-form `pi1` update for every member:
/// `pi1 = colnormalize(pi2 * exp(-(C + lambda)/rho) + eps) * w^(k)`.
pub fn badmm_pi1_update<D>(state: &mut BadmmState, costs: &[Array2<f64>], members: &[D]) -> Result<()>
where
    D: AsRef<DiscreteDistribution> + Sync,
{
    let (rho, eps) = (state.rho, state.eps);
    if !(rho > 0.0) {
        return Err(Error::ZeroRho);
    }
    state.pi1 = (0..members.len())
        .into_par_iter()
        .map(|k| {
            member_pi1(
                &state.pi2[k],
                &state.lambda[k],
                &costs[k],
                members[k].as_ref().weights(),
                rho,
                eps,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(())
}

/// Normalized row masses of `pi1 * exp(lambda/rho) + eps`, one vector per
/// member; the input to [`consensus_weights`].
pub fn tilde_row_masses(state: &BadmmState) -> Result<Vec<Vec<f64>>> {
    state
        .pi1
        .par_iter()
        .zip(state.lambda.par_iter())
        .map(|(p, l)| {
            let t = member_tilde1(p, l, state.rho, state.eps)?;
            row_masses(&t)
        })
        .collect()
}

fn row_masses(t: &Array2<f64>) -> Result<Vec<f64>> {
    let rows: Vec<f64> = t.rows().into_iter().map(|r| r.sum()).collect();
    normalize(&rows).ok_or(Error::NonFinite("B-ADMM row masses"))
}

/// Closed-form `pi2` update for every member:
/// `pi2 = rownormalize(pi1 * exp(lambda/rho) + eps) * w`.
pub fn badmm_pi2_update(state: &mut BadmmState, w: &[f64]) -> Result<()> {
    let (rho, eps) = (state.rho, state.eps);
    state.pi2 = state
        .pi1
        .par_iter()
        .zip(state.lambda.par_iter())
        .map(|(p, l)| member_tilde1(p, l, rho, eps).map(|t| member_pi2(&t, w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(())
}

/// Combines normalized row-mass vectors into centroid weights.
pub fn consensus_weights(tilde_w: &[Vec<f64>], rule: ConsensusRule) -> Result<Vec<f64>> {
    let first = tilde_w.first().ok_or(Error::EmptyInput("consensus inputs"))?;
    let m = first.len();
    for v in tilde_w {
        if v.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: v.len() });
        }
        if !crate::simplex::on_simplex(v, 1e-6) {
            return Err(Error::InvalidParameter("consensus input is off the simplex".into()));
        }
    }
    let n = tilde_w.len() as f64;
    let mut acc = vec![0.0; m];
    for v in tilde_w {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += match rule {
                ConsensusRule::R1 => *x,
                ConsensusRule::R2 => x.max(0.0).sqrt(),
            };
        }
    }
    let w: Vec<f64> = match rule {
        ConsensusRule::R1 => acc.iter().map(|a| a / n).collect(),
        ConsensusRule::R2 => acc.iter().map(|a| (a / n) * (a / n)).collect(),
    };
    normalize(&w).ok_or(Error::NonFinite("consensus weights"))
}

/// `lambda += rho * (pi1 - pi2)`.
pub fn dual_update(state: &mut BadmmState) {
    let rho = state.rho;
    state
        .lambda
        .par_iter_mut()
        .zip(state.pi1.par_iter().zip(state.pi2.par_iter()))
        .for_each(|(l, (p1, p2))| {
            Zip::from(l).and(p1).and(p2).for_each(|l, &a, &b| *l += rho * (a - b));
        });
}

/// Runs the modified B-ADMM centroid update from `init`.
///
/// `warm[k]`, when present and correctly shaped, seeds `pi2` and the dual
/// for member `k`; otherwise the product coupling and a zero dual are used. Each iteration performs the
/// `pi1` update, the consensus weight update, the `pi2` update and the dual
/// step; every `tau` iterations the support is relocated from `pi2` and the
/// cost matrices and `rho` are refreshed. Stops after `inner_iters`, when
/// both residuals drop below [`RESIDUAL_STOP`] (relocating once more), or
/// when `budget` runs out.
pub fn badmm_centroid<D>(
    members: &[D],
    init: &DiscreteDistribution,
    warm: Option<&[Option<WarmStart>]>,
    params: &BadmmParams,
    budget: Budget,
) -> Result<BadmmOutput>
where
    D: AsRef<DiscreteDistribution> + Sync,
{
    params.validate()?;
    check_members(members, init)?;
    if init.weights().iter().any(|w| *w <= 0.0) {
        return Err(Error::InvalidParameter(
            "B-ADMM needs strictly positive initial weights".into(),
        ));
    }
    let relocate = !(params.fixed_support || init.is_symbolic());
    let mut centroid = init.clone();
    let mut costs = member_costs(&centroid, members)?;
    let rho = rho_from_cost_matrices(&costs, centroid.len(), params.rho0);
    if !(rho > 0.0) {
        if relocate {
            // every cost is zero: centroid and members coincide at one point
            let objective = objective(&centroid, members)?;
            let state = BadmmState::new(centroid.weights(), members, warm, 0.0, params.float_floor);
            return Ok(BadmmOutput {
                centroid: Centroid { distribution: centroid, objective },
                state,
                trace: ResidualTrace::default(),
                stats: SolveStats::default(),
            });
        }
        return Err(Error::ZeroRho);
    }
    let mut state = BadmmState::new(centroid.weights(), members, warm, rho, params.float_floor);
    let mut w = centroid.weights().to_vec();
    let mut trace = ResidualTrace::default();
    let mut stats = SolveStats::default();

    for it in 1..=params.inner_iters {
        badmm_pi1_update(&mut state, &costs, members)?;
        let tilde = tilde_row_masses(&state)?;
        w = consensus_weights(&tilde, params.rule)?;
        let previous = state.pi2.clone();
        badmm_pi2_update(&mut state, &w)?;
        dual_update(&mut state);

        let (primal, dual) = residuals(&state, &previous);
        trace.primal.push(primal);
        trace.dual.push(dual);

        let converged = primal.max(dual) < RESIDUAL_STOP;
        if relocate && (it % params.tau == 0 || converged) {
            let weighted = centroid.with_weights(w.clone())?;
            centroid = update_support(&weighted, members, &state.pi2)?;
            costs = member_costs(&centroid, members)?;
            let rho = rho_from_cost_matrices(&costs, centroid.len(), params.rho0);
            if !(rho > 0.0) {
                return Err(Error::ZeroRho);
            }
            state.rho = rho;
        }

        let out_of_time = stats.tick(&budget);
        if converged || out_of_time {
            break;
        }
    }

    let distribution = DiscreteDistribution::from_parts_normalized(w, centroid.support().clone())?;
    let objective = objective(&distribution, members)?;
    Ok(BadmmOutput {
        centroid: Centroid { distribution, objective },
        state,
        trace,
        stats,
    })
}

fn residuals(state: &BadmmState, previous_pi2: &[Array2<f64>]) -> (f64, f64) {
    let mut primal = 0.0;
    let mut dual = 0.0;
    for k in 0..state.pi1.len() {
        Zip::from(&state.pi1[k])
            .and(&state.pi2[k])
            .and(&previous_pi2[k])
            .for_each(|&a, &b, &c| {
                primal += (a - b) * (a - b);
                dual += (b - c) * (b - c);
            });
    }
    (primal.sqrt(), dual.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn d1(w: Vec<f64>, x: Vec<f64>) -> DiscreteDistribution {
        DiscreteDistribution::from_flat(w, 1, x).unwrap()
    }

    fn state2(pi2: Array2<f64>, lambda: Array2<f64>, rho: f64) -> BadmmState {
        BadmmState {
            pi1: vec![pi2.clone()],
            pi2: vec![pi2],
            lambda: vec![lambda],
            rho,
            eps: 1e-16,
        }
    }

    #[test]
    fn pi1_with_zero_cost_and_dual_is_column_rescaled_pi2() {
        let member = d1(vec![0.3, 0.7], vec![0.0, 1.0]);
        let pi2 = array![[0.1, 0.2], [0.3, 0.4]];
        let mut s = state2(pi2.clone(), Array2::zeros((2, 2)), 1.0);
        badmm_pi1_update(&mut s, &[Array2::zeros((2, 2))], &[member]).unwrap();
        let expect = array![[0.1 / 0.4 * 0.3, 0.2 / 0.6 * 0.7], [0.3 / 0.4 * 0.3, 0.4 / 0.6 * 0.7]];
        for (a, b) in s.pi1[0].iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pi1_single_row_is_member_weights() {
        let member = d1(vec![0.25, 0.75], vec![0.0, 1.0]);
        let mut s = state2(array![[0.6, 0.4]], array![[3.0, -1.0]], 0.5);
        badmm_pi1_update(&mut s, &[array![[2.0, 7.0]]], &[member]).unwrap();
        assert!((s.pi1[0][[0, 0]] - 0.25).abs() < 1e-15);
        assert!((s.pi1[0][[0, 1]] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn pi1_two_by_two_direct_evaluation() {
        let member = d1(vec![0.4, 0.6], vec![0.0, 1.0]);
        let mut s = state2(array![[0.25, 0.25], [0.25, 0.25]], Array2::zeros((2, 2)), 1.0);
        badmm_pi1_update(&mut s, &[array![[0.0, 1.0], [1.0, 0.0]]], &[member]).unwrap();
        let e = (-1.0f64).exp();
        // column 0 proportional to (1, e^-1), column 1 to (e^-1, 1)
        let c0 = [0.4 / (1.0 + e), 0.4 * e / (1.0 + e)];
        let c1 = [0.6 * e / (1.0 + e), 0.6 / (1.0 + e)];
        assert!((s.pi1[0][[0, 0]] - c0[0]).abs() < 1e-12);
        assert!((s.pi1[0][[1, 0]] - c0[1]).abs() < 1e-12);
        assert!((s.pi1[0][[0, 1]] - c1[0]).abs() < 1e-12);
        assert!((s.pi1[0][[1, 1]] - c1[1]).abs() < 1e-12);
    }

    #[test]
    fn pi1_non_finite_reported() {
        let member = d1(vec![1.0], vec![0.0]);
        let mut s = state2(array![[1.0]], array![[0.0]], 1.0);
        let r = badmm_pi1_update(&mut s, &[array![[f64::NAN]]], &[member]);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn pi2_with_zero_dual_is_row_rescaled_pi1() {
        let mut s = state2(Array2::zeros((2, 2)), Array2::zeros((2, 2)), 1.0);
        s.pi1 = vec![array![[0.1, 0.3], [0.2, 0.4]]];
        badmm_pi2_update(&mut s, &[0.5, 0.5]).unwrap();
        let expect = array![[0.125, 0.375], [0.5 / 3.0, 1.0 / 3.0]];
        for (a, b) in s.pi2[0].iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pi2_single_column_is_centroid_weights() {
        let mut s = state2(Array2::zeros((3, 1)), array![[1.0], [-2.0], [0.5]], 2.0);
        s.pi1 = vec![array![[0.2], [0.5], [0.3]]];
        badmm_pi2_update(&mut s, &[0.1, 0.6, 0.3]).unwrap();
        assert!((s.pi2[0][[0, 0]] - 0.1).abs() < 1e-15);
        assert!((s.pi2[0][[1, 0]] - 0.6).abs() < 1e-15);
        assert!((s.pi2[0][[2, 0]] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn pi2_dual_doubles_entry_before_rescaling() {
        let rho = 1.5;
        let lambda = array![[rho * 2f64.ln(), 0.0], [0.0, 0.0]];
        let mut s = state2(Array2::zeros((2, 2)), lambda, rho);
        s.pi1 = vec![array![[0.25, 0.25], [0.25, 0.25]]];
        badmm_pi2_update(&mut s, &[0.6, 0.4]).unwrap();
        // row 0 tilde = (0.5, 0.25) -> (2/3, 1/3) * 0.6
        assert!((s.pi2[0][[0, 0]] - 0.4).abs() < 1e-12);
        assert!((s.pi2[0][[0, 1]] - 0.2).abs() < 1e-12);
        assert!((s.pi2[0][[1, 0]] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn consensus_examples() {
        let v = vec![0.2, 0.3, 0.5];
        for rule in [ConsensusRule::R1, ConsensusRule::R2] {
            let w = consensus_weights(&[v.clone()], rule).unwrap();
            assert!(w.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-15));
            let w = consensus_weights(&[v.clone(), v.clone(), v.clone()], rule).unwrap();
            assert!(w.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-15));
            let w = consensus_weights(&[vec![1.0, 0.0], vec![0.0, 1.0]], rule).unwrap();
            assert_eq!(w, vec![0.5, 0.5]);
        }
        // R2 differs from R1 on unequal inputs: sqrt-mean of (0.9, 0.1) & (0.1, 0.9)
        let r2 = consensus_weights(&[vec![0.64, 0.36], vec![0.04, 0.96]], ConsensusRule::R2).unwrap();
        let a = ((0.8f64 + 0.2) / 2.0).powi(2);
        let b = ((0.6f64 + 0.96f64.sqrt()) / 2.0).powi(2);
        assert!((r2[0] - a / (a + b)).abs() < 1e-12);
        assert!(consensus_weights(&[vec![0.5, 0.6]], ConsensusRule::R1).is_err());
    }

    #[test]
    fn dual_update_accumulates() {
        let mut s = state2(Array2::zeros((2, 2)), Array2::zeros((2, 2)), 1.0);
        s.pi1 = vec![array![[0.3, 0.2], [0.1, 0.4]]];
        s.pi2 = s.pi1.clone();
        dual_update(&mut s);
        assert_eq!(s.lambda[0], Array2::<f64>::zeros((2, 2)));

        s.pi2 = vec![&s.pi1[0] - &Array2::<f64>::ones((2, 2))];
        dual_update(&mut s);
        assert_eq!(s.lambda[0], Array2::<f64>::ones((2, 2)));

        s.rho = 0.5;
        let before = s.lambda[0].clone();
        dual_update(&mut s);
        dual_update(&mut s);
        let advanced = &s.lambda[0] - &before;
        assert!(advanced.iter().all(|v| (v - 2.0 * 0.5).abs() < 1e-15));
    }

    #[test]
    fn marginals_hold_through_iterations() {
        let members = vec![
            d1(vec![0.2, 0.8], vec![0.0, 1.0]),
            d1(vec![0.5, 0.25, 0.25], vec![-1.0, 0.5, 2.0]),
        ];
        let init = d1(vec![0.5, 0.5], vec![0.0, 1.0]);
        let costs = member_costs(&init, &members).unwrap();
        let rho = rho_from_cost_matrices(&costs, 2, 2.0);
        let mut s = BadmmState::new(init.weights(), &members, None, rho, 1e-16);
        for _ in 0..20 {
            badmm_pi1_update(&mut s, &costs, &members).unwrap();
            for (k, p) in members.iter().enumerate() {
                for (j, col) in s.pi1[k].columns().into_iter().enumerate() {
                    assert!((col.sum() - p.weights()[j]).abs() < 1e-12);
                }
            }
            let w = consensus_weights(&tilde_row_masses(&s).unwrap(), ConsensusRule::R1).unwrap();
            badmm_pi2_update(&mut s, &w).unwrap();
            for pi in &s.pi2 {
                for (i, row) in pi.rows().into_iter().enumerate() {
                    assert!((row.sum() - w[i]).abs() < 1e-12);
                }
                assert!(pi.iter().all(|v| *v > 0.0));
            }
            dual_update(&mut s);
        }
    }

    #[test]
    fn single_member_is_its_own_barycenter() {
        let p = d1(vec![0.2, 0.5, 0.3], vec![-1.0, 0.0, 3.0]);
        let params = BadmmParams { inner_iters: 300, ..Default::default() };
        let out = badmm_centroid(&[p.clone()], &p, None, &params, Budget::unlimited()).unwrap();
        assert!(out.centroid.objective < 1e-6, "objective {}", out.centroid.objective);
        // coupling concentrates on the diagonal
        let pi = &out.state.pi2[0];
        for i in 0..3 {
            assert!(pi[[i, i]] > 0.9 * p.weights()[i]);
        }
    }

    #[test]
    fn two_point_masses_meet_in_the_middle() {
        let a = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        let b = DiscreteDistribution::point_mass(&[2.0]).unwrap();
        let init = DiscreteDistribution::point_mass(&[0.3]).unwrap();
        let out = badmm_centroid(&[a, b], &init, None, &BadmmParams::default(), Budget::unlimited()).unwrap();
        let x = out.centroid.distribution.points().unwrap()[[0, 0]];
        assert!((x - 1.0).abs() < 1e-12);
        assert!((out.centroid.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rho_with_fixed_support_is_an_error() {
        let p = DiscreteDistribution::point_mass(&[1.0]).unwrap();
        let params = BadmmParams { fixed_support: true, ..Default::default() };
        let r = badmm_centroid(&[p.clone()], &p, None, &params, Budget::unlimited());
        assert!(matches!(r, Err(Error::ZeroRho)));
    }

    #[test]
    fn rejects_zero_initial_weight() {
        let p = d1(vec![0.5, 0.5], vec![0.0, 1.0]);
        let init = d1(vec![1.0, 0.0], vec![0.0, 1.0]);
        assert!(badmm_centroid(&[p], &init, None, &BadmmParams::default(), Budget::unlimited()).is_err());
    }
}
