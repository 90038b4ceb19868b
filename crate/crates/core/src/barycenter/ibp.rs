//! Entropic barycenter by iterative Bregman projections.
//!
//! With kernels `K_k = exp(-C_k / eps)` and scalings `u_k, v_k`, one
//! iteration projects every coupling `diag(u_k) K_k diag(v_k)` onto its
//! member marginal, then onto a common row marginal given by the geometric
//! mean of the current row marginals. The kernels are evaluated directly,
//! so a too small `eps` underflows; that is reported as
//! [`Error::IbpOverflow`] instead of being stabilized away.

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;

use super::{check_members, member_costs, objective, update_support, Budget, Centroid, SolveStats};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IbpVariant {
    /// Never move the support.
    #[default]
    FixedSupport,
    /// Relocate every `tau` iterations and keep the scalings.
    V1,
    /// Relocate every `tau` iterations and restart the scalings.
    V2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbpParams {
    /// Regularization relative to the mean initial cost entry.
    pub epsilon0: f64,
    pub iters: usize,
    pub tau: usize,
    pub variant: IbpVariant,
}

impl Default for IbpParams {
    fn default() -> Self {
        Self {
            epsilon0: 0.1,
            iters: 100,
            tau: 10,
            variant: IbpVariant::FixedSupport,
        }
    }
}

impl IbpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon0 > 0.0 && self.epsilon0.is_finite()) {
            return Err(Error::InvalidParameter("epsilon0 must be positive".into()));
        }
        if self.iters == 0 || self.tau == 0 {
            return Err(Error::InvalidParameter("iters and tau must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IbpOutput {
    pub centroid: Centroid,
    /// Absolute regularization used for the whole run.
    pub epsilon: f64,
    pub plans: Vec<Array2<f64>>,
    pub stats: SolveStats,
}

struct Scaling {
    kernel: Array2<f64>,
    u: Array1<f64>,
    v: Array1<f64>,
}

impl Scaling {
    fn plan(&self) -> Array2<f64> {
        let mut p = self.kernel.clone();
        for ((i, j), x) in p.indexed_iter_mut() {
            *x *= self.u[i] * self.v[j];
        }
        p
    }
}

fn kernel(cost: &Array2<f64>, epsilon: f64, iteration: usize) -> Result<Array2<f64>> {
    let k = cost.mapv(|c| (-c / epsilon).exp());
    // a row or column that underflowed entirely cannot carry any mass
    let dead_row = k.axis_iter(Axis(0)).any(|r| r.iter().all(|v| *v == 0.0));
    let dead_col = k.axis_iter(Axis(1)).any(|c| c.iter().all(|v| *v == 0.0));
    if dead_row || dead_col {
        return Err(Error::IbpOverflow { iteration });
    }
    Ok(k)
}

fn all_finite_positive(v: &Array1<f64>) -> bool {
    v.iter().all(|x| x.is_finite() && *x > 0.0)
}

pub fn ibp_centroid<D>(
    members: &[D],
    init: &DiscreteDistribution,
    params: &IbpParams,
    budget: Budget,
) -> Result<IbpOutput>
where
    D: AsRef<DiscreteDistribution> + Sync,
{
    params.validate()?;
    check_members(members, init)?;
    let relocate = params.variant != IbpVariant::FixedSupport;
    if relocate && init.is_symbolic() {
        return Err(Error::SymbolicUnsupported("IBP support relocation"));
    }
    let m = init.len();
    let n = members.len();

    let costs = member_costs(init, members)?;
    let cells: usize = costs.iter().map(|c| c.len()).sum();
    let mean_cost = costs.iter().map(|c| c.sum()).sum::<f64>() / cells as f64;
    if !(mean_cost > 0.0) {
        // every cost is zero: the centroid already coincides with all members
        let objective = objective(init, members)?;
        return Ok(IbpOutput {
            centroid: Centroid { distribution: init.clone(), objective },
            epsilon: 0.0,
            plans: Vec::new(),
            stats: SolveStats::default(),
        });
    }
    let epsilon = params.epsilon0 * mean_cost;

    let mut scalings = costs
        .iter()
        .zip(members)
        .map(|(c, p)| {
            Ok(Scaling {
                kernel: kernel(c, epsilon, 0)?,
                u: Array1::ones(m),
                v: Array1::ones(p.as_ref().len()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut centroid = init.clone();
    let mut p = Array1::from(init.weights().to_vec());
    let mut stats = SolveStats::default();

    for it in 1..=params.iters {
        // projection onto the member marginals, then the row products K v
        let kv: Vec<Array1<f64>> = scalings
            .par_iter_mut()
            .zip(members.par_iter())
            .map(|(s, member)| {
                let wk = Array1::from(member.as_ref().weights().to_vec());
                s.v = &wk / &s.kernel.t().dot(&s.u);
                s.kernel.dot(&s.v)
            })
            .collect();

        // geometric mean of the row marginals, accumulated in log space
        // sequentially so the result does not depend on the worker count
        let mut log_p = Array1::<f64>::zeros(m);
        for (s, kv) in scalings.iter().zip(&kv) {
            log_p += &(&s.u * kv).mapv(f64::ln);
        }
        p = (log_p / n as f64).mapv(f64::exp);
        if !p.iter().all(|x| x.is_finite()) || !(p.sum() > 0.0) {
            return Err(Error::IbpOverflow { iteration: it });
        }
        for (s, kv) in scalings.iter_mut().zip(&kv) {
            s.u = &p / kv;
            if !all_finite_positive(&s.u) || !s.v.iter().all(|x| x.is_finite()) {
                return Err(Error::IbpOverflow { iteration: it });
            }
        }

        if relocate && it % params.tau == 0 {
            let plans: Vec<Array2<f64>> = scalings.iter().map(Scaling::plan).collect();
            let weights: Vec<f64> = plans.iter().map(|pl| pl.sum_axis(Axis(1))).fold(
                vec![0.0; m],
                |mut acc, r| {
                    acc.iter_mut().zip(r.iter()).for_each(|(a, b)| *a += b / n as f64);
                    acc
                },
            );
            let weighted = DiscreteDistribution::from_parts_normalized(weights, centroid.support().clone())?;
            centroid = update_support(&weighted, members, &plans)?;
            let costs = member_costs(&centroid, members)?;
            for (s, c) in scalings.iter_mut().zip(&costs) {
                s.kernel = kernel(c, epsilon, it)?;
                if params.variant == IbpVariant::V2 {
                    s.u.fill(1.0);
                    s.v.fill(1.0);
                }
            }
        }
        if stats.tick(&budget) {
            break;
        }
    }

    let plans: Vec<Array2<f64>> = scalings.iter().map(Scaling::plan).collect();
    let distribution = DiscreteDistribution::from_parts_normalized(p.to_vec(), centroid.support().clone())?;
    let objective = objective(&distribution, members)?;
    Ok(IbpOutput {
        centroid: Centroid { distribution, objective },
        epsilon,
        plans,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(w: Vec<f64>, dim: usize, x: Vec<f64>) -> DiscreteDistribution {
        DiscreteDistribution::from_flat(w, dim, x).unwrap()
    }

    #[test]
    fn single_member_recovers_weights() {
        let p = d(vec![0.1, 0.6, 0.3], 1, vec![0.0, 1.0, 2.0]);
        let params = IbpParams { epsilon0: 0.01, iters: 50, ..Default::default() };
        let out = ibp_centroid(&[p.clone()], &p, &params, Budget::unlimited()).unwrap();
        for (a, b) in out.centroid.distribution.weights().iter().zip(p.weights()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn geometric_mean_of_two_point_masses() {
        // each member sits on one centroid point; with a tiny eps the row
        // marginals are (1, 0) and (0, 1) up to the kernel tail, so the
        // geometric mean is symmetric
        let a = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        let b = DiscreteDistribution::point_mass(&[1.0]).unwrap();
        let init = d(vec![0.5, 0.5], 1, vec![0.0, 1.0]);
        let params = IbpParams { epsilon0: 0.2, iters: 20, ..Default::default() };
        let out = ibp_centroid(&[a, b], &init, &params, Budget::unlimited()).unwrap();
        let w = out.centroid.distribution.weights();
        assert!((w[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tiny_epsilon_overflows() {
        let a = d(vec![0.5, 0.5], 1, vec![0.0, 10.0]);
        let b = d(vec![0.5, 0.5], 1, vec![3.0, 7.0]);
        let init = d(vec![0.5, 0.5], 1, vec![-20.0, 30.0]);
        let params = IbpParams { epsilon0: 1e-4, ..Default::default() };
        let err = ibp_centroid(&[a, b], &init, &params, Budget::unlimited()).unwrap_err();
        assert!(matches!(err, Error::IbpOverflow { .. }));
        assert!(err.is_solver_failure());
    }

    #[test]
    fn relocating_variants_move_the_support() {
        let a = d(vec![0.5, 0.5], 1, vec![0.0, 4.0]);
        let b = d(vec![0.5, 0.5], 1, vec![1.0, 5.0]);
        let init = d(vec![0.5, 0.5], 1, vec![-1.0, 6.0]);
        for variant in [IbpVariant::V1, IbpVariant::V2] {
            let params = IbpParams { epsilon0: 0.01, iters: 60, tau: 10, variant };
            let out = ibp_centroid(&[a.clone(), b.clone()], &init, &params, Budget::unlimited()).unwrap();
            let x = out.centroid.distribution.points().unwrap();
            assert!((x[[0, 0]] - 0.5).abs() < 1e-3, "{variant:?}: {x}");
            assert!((x[[1, 0]] - 4.5).abs() < 1e-3, "{variant:?}: {x}");
        }
    }

    #[test]
    fn rejects_bad_params() {
        let p = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        let params = IbpParams { epsilon0: 0.0, ..Default::default() };
        assert!(ibp_centroid(&[p.clone()], &p, &params, Budget::unlimited()).is_err());
    }
}
