//! Full-batch LP centroid update, the small-scale accuracy oracle.
//!
//! For a fixed support the centroid weights and all member couplings are
//! found jointly by one LP; the support update is then applied and the LP is
//! re-optimized from its previous basis (the feasible region depends only
//! on the member weights, so only the cost vector changes).

use ndarray::Array2;

use super::{check_members, member_costs, objective, update_support, Budget, Centroid, SolveStats};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::lp::DenseSimplex;

pub const MAX_MEMBERS: usize = 32;
pub const MAX_SUPPORT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct FullLpParams {
    pub outer_iters: usize,
    pub fixed_support: bool,
}

impl Default for FullLpParams {
    fn default() -> Self {
        Self { outer_iters: 20, fixed_support: false }
    }
}

#[derive(Debug, Clone)]
pub struct FullLpOutput {
    pub centroid: Centroid,
    pub plans: Vec<Array2<f64>>,
    pub stats: SolveStats,
}

fn lp_cost(costs: &[Array2<f64>], m: usize, n_vars: usize) -> Vec<f64> {
    let n = costs.len() as f64;
    let mut c = vec![0.0; n_vars];
    let mut off = m;
    for ck in costs {
        for (dst, v) in c[off..off + ck.len()].iter_mut().zip(ck.iter()) {
            *dst = v / n;
        }
        off += ck.len();
    }
    c
}

pub fn fulllp_centroid<D>(
    members: &[D],
    init: &DiscreteDistribution,
    params: &FullLpParams,
    budget: Budget,
) -> Result<FullLpOutput>
where
    D: AsRef<DiscreteDistribution> + Sync,
{
    check_members(members, init)?;
    if params.outer_iters == 0 {
        return Err(Error::InvalidParameter("outer_iters must be positive".into()));
    }
    let m = init.len();
    if members.len() > MAX_MEMBERS
        || m > MAX_SUPPORT
        || members.iter().any(|p| p.as_ref().len() > MAX_SUPPORT)
    {
        return Err(Error::ScaleGuard(format!(
            "full-batch LP limited to {MAX_MEMBERS} members with at most {MAX_SUPPORT} support points"
        )));
    }
    let sizes: Vec<usize> = members.iter().map(|p| p.as_ref().len()).collect();
    let n_vars = m + sizes.iter().map(|mk| m * mk).sum::<usize>();

    // rows per member: couplings' row sums equal w, column sums equal w^(k)
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut off = m;
    for (p, &mk) in members.iter().zip(&sizes) {
        for i in 0..m {
            let mut row = vec![0.0; n_vars];
            row[i] = -1.0;
            row[off + i * mk..off + (i + 1) * mk].iter_mut().for_each(|v| *v = 1.0);
            a.push(row);
            b.push(0.0);
        }
        for (j, &wj) in p.as_ref().weights().iter().enumerate() {
            let mut row = vec![0.0; n_vars];
            for i in 0..m {
                row[off + i * mk + j] = 1.0;
            }
            a.push(row);
            b.push(wj);
        }
        off += m * mk;
    }

    let relocate = !(params.fixed_support || init.is_symbolic());
    let mut centroid = init.clone();
    let mut stats = SolveStats::default();
    let costs = member_costs(&centroid, members)?;
    let (mut lp, mut sol) =
        DenseSimplex::solve(&a, &b, &lp_cost(&costs, m, n_vars)).map_err(|e| Error::Lp(format!("internal: {e}")))?;
    let extract = |x: &[f64]| -> Vec<Array2<f64>> {
        let mut off = m;
        sizes
            .iter()
            .map(|&mk| {
                let p = Array2::from_shape_vec((m, mk), x[off..off + m * mk].to_vec()).expect("shape");
                off += m * mk;
                p
            })
            .collect()
    };
    let mut stalled = false;
    let plans = loop {
        let plans = extract(&sol.x);
        centroid = DiscreteDistribution::from_parts_normalized(sol.x[..m].to_vec(), centroid.support().clone())?;
        let done = stats.tick(&budget);
        if !relocate || done || stalled || stats.iterations >= params.outer_iters {
            break plans;
        }
        let moved = update_support(&centroid, members, &plans)?;
        if moved == centroid {
            break plans;
        }
        centroid = moved;
        let costs = member_costs(&centroid, members)?;
        let previous = sol.objective;
        sol = lp.reoptimize(&lp_cost(&costs, m, n_vars))?;
        stalled = previous - sol.objective <= 1e-14 * previous.abs().max(1.0);
    };

    let objective = objective(&centroid, members)?;
    Ok(FullLpOutput {
        centroid: Centroid { distribution: centroid, objective },
        plans,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(w: Vec<f64>, x: Vec<f64>) -> DiscreteDistribution {
        DiscreteDistribution::from_flat(w, 1, x).unwrap()
    }

    #[test]
    fn single_member_is_recovered() {
        let p = d(vec![0.2, 0.5, 0.3], vec![0.0, 1.0, 3.0]);
        let out = fulllp_centroid(&[p.clone()], &p, &FullLpParams::default(), Budget::unlimited()).unwrap();
        assert!(out.centroid.objective < 1e-12);
    }

    #[test]
    fn two_point_masses_meet_in_the_middle() {
        let a = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        let b = DiscreteDistribution::point_mass(&[2.0]).unwrap();
        let init = DiscreteDistribution::point_mass(&[7.0]).unwrap();
        let out = fulllp_centroid(&[a, b], &init, &FullLpParams::default(), Budget::unlimited()).unwrap();
        assert!((out.centroid.distribution.points().unwrap()[[0, 0]] - 1.0).abs() < 1e-12);
        assert!((out.centroid.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_support_weights_pick_nearest_points() {
        // both members are point masses on centroid points, so the optimal
        // weights put all mass on whichever point minimizes the total cost
        let a = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        let b = DiscreteDistribution::point_mass(&[1.0]).unwrap();
        let init = d(vec![0.5, 0.25, 0.25], vec![0.0, 0.5, 1.0]);
        let params = FullLpParams { fixed_support: true, ..Default::default() };
        let out = fulllp_centroid(&[a, b], &init, &params, Budget::unlimited()).unwrap();
        assert!((out.centroid.objective - 0.25).abs() < 1e-12);
        assert!((out.centroid.distribution.weights()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_guard() {
        let p = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        let members = vec![p.clone(); MAX_MEMBERS + 1];
        let err = fulllp_centroid(&members, &p, &FullLpParams::default(), Budget::unlimited()).unwrap_err();
        assert!(matches!(err, Error::ScaleGuard(_)));
    }
}
