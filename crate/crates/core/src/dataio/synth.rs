//! Synthetic data with planted groups.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal, StudentT};

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// Number of distributions.
    pub n: usize,
    pub d: usize,
    /// Support size of every distribution.
    pub m: usize,
    pub clusters: usize,
    /// Spread of the group means, in units of `noise`.
    pub separation: f64,
    /// Scale of the per-point Gaussian and Student-t perturbations.
    pub noise: f64,
    pub dirichlet_alpha: f64,
    pub t_dof: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 100,
            d: 2,
            m: 4,
            clusters: 2,
            separation: 10.0,
            noise: 1.0,
            dirichlet_alpha: 1.0,
            t_dof: 5.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.m == 0 || self.clusters == 0 {
            return Err(Error::InvalidParameter("n, d, m and clusters must be positive".into()));
        }
        if !(self.separation >= 0.0) || !(self.noise >= 0.0) {
            return Err(Error::InvalidParameter("separation and noise must be non-negative".into()));
        }
        if !(self.dirichlet_alpha > 0.0) || !(self.t_dof > 0.0) {
            return Err(Error::InvalidParameter("dirichlet_alpha and t_dof must be positive".into()));
        }
        Ok(())
    }
}

/// Distributions and their planted group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub data: Vec<DiscreteDistribution>,
    pub labels: Vec<usize>,
}

/// Group `g` has mean `mu_g ~ N(0, (separation * noise)^2 I)`. Distribution
/// `i` belongs to group `i mod clusters`; each of its support points is
/// `mu_g + noise * (z + t)` with `z` standard normal and `t` Student-t per
/// coordinate. Weights are a symmetric Dirichlet draw, each entry scaled by
/// a uniform factor in `[0.9, 1.1]` and renormalized.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gamma = Gamma::new(spec.dirichlet_alpha, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let student = StudentT::new(spec.t_dof).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let scale = spec.separation * spec.noise;
    let means: Vec<Vec<f64>> = (0..spec.clusters)
        .map(|_| {
            (0..spec.d)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();

    let mut data = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let g = i % spec.clusters;
        let mut w: Vec<f64> = (0..spec.m).map(|_| gamma.sample(&mut rng)).collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            // every gamma draw underflowed (tiny alpha): fall back to uniform
            w.iter_mut().for_each(|v| *v = 1.0);
        }
        for v in w.iter_mut() {
            *v *= rng.random_range(0.9..=1.1);
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);

        let x = Array2::from_shape_fn((spec.m, spec.d), |(_, c)| {
            let z: f64 = rng.sample(StandardNormal);
            let t: f64 = student.sample(&mut rng);
            means[g][c] + spec.noise * (z + t)
        });
        data.push(DiscreteDistribution::new(w, x)?);
        labels.push(g);
    }
    Ok(SynthData { data, labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_group() {
        let spec = SynthSpec { separation: 0.0, clusters: 1, n: 10, ..Default::default() };
        let out = generate_synthetic(&spec).unwrap();
        assert!(out.labels.iter().all(|l| *l == 0));
        assert_eq!(out.data.len(), 10);
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = SynthSpec { seed: 42, ..Default::default() };
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SynthSpec { seed: 43, ..Default::default() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn shapes_and_simplex() {
        let spec = SynthSpec { n: 7, d: 3, m: 5, clusters: 3, ..Default::default() };
        let out = generate_synthetic(&spec).unwrap();
        assert_eq!(out.labels, vec![0, 1, 2, 0, 1, 2, 0]);
        for p in &out.data {
            assert_eq!(p.points().unwrap().dim(), (5, 3));
            assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_weights_are_near_uniform() {
        // symmetric Dirichlet: each coordinate has mean 1/m and variance
        // (m - 1) / (m^2 (m alpha + 1)); the perturbation keeps the symmetry
        let m = 4;
        let n = 4000;
        let spec = SynthSpec { n, m, d: 1, clusters: 1, ..Default::default() };
        let out = generate_synthetic(&spec).unwrap();
        let var = (m as f64 - 1.0) / ((m * m) as f64 * (m as f64 + 1.0));
        let se = (var / n as f64).sqrt();
        for j in 0..m {
            let mean = out.data.iter().map(|p| p.weights()[j]).sum::<f64>() / n as f64;
            assert!((mean - 0.25).abs() < 5.0 * se, "coordinate {j}: {mean}");
        }
    }

    #[test]
    fn rejects_invalid_spec() {
        assert!(generate_synthetic(&SynthSpec { n: 0, ..Default::default() }).is_err());
        assert!(generate_synthetic(&SynthSpec { t_dof: 0.0, ..Default::default() }).is_err());
    }
}
