//! Nearest-centroid assignment under W2 with triangle-inequality pruning.

use ndarray::Array2;
use rayon::prelude::*;

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::transport::wasserstein2;

/// Relative and absolute slack on the pruning test, covering round-off in
/// the computed distances.
const PRUNE_REL: f64 = 1e-9;
const PRUNE_ABS: f64 = 1e-12;

/// State carried between assignment rounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssignmentCache {
    /// Last label of each object.
    pub labels: Vec<Option<usize>>,
    /// W2 distance from each object to its assigned centroid.
    pub distances: Vec<f64>,
    /// W2 distances between centroids of the latest round (pruned runs only).
    pub inter: Array2<f64>,
}

impl AssignmentCache {
    pub fn new(n: usize) -> Self {
        Self {
            labels: vec![None; n],
            distances: vec![f64::INFINITY; n],
            inter: Array2::zeros((0, 0)),
        }
    }

    /// Current labels; unassigned objects (never the case after a call to
    /// [`assign_labels`]) map to 0.
    pub fn label_vec(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.unwrap_or(0)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssignStats {
    /// Object-to-centroid distance evaluations.
    pub evaluations: usize,
    /// Centroid-to-centroid distance evaluations.
    pub inter_evaluations: usize,
    /// Objects whose label changed (first assignments included).
    pub changes: usize,
}

/// Assigns every object to its nearest centroid (lowest index on ties).
///
/// Each object first evaluates its previous centroid. With `prune`, a
/// candidate `c` is skipped when `W(c_best, c) >= 2 W(x, c_best)` (with a
/// small safety margin), since the triangle inequality then guarantees
/// `W(x, c) > W(x, c_best)`. Labels are identical with and without pruning.
/// Pruning needs a metric ground cost, so it is ignored for symbolic data.
pub fn assign_labels(
    data: &[DiscreteDistribution],
    centroids: &[DiscreteDistribution],
    cache: &mut AssignmentCache,
    prune: bool,
) -> Result<AssignStats> {
    let k = centroids.len();
    if k == 0 {
        return Err(Error::EmptyInput("centroids"));
    }
    if cache.labels.len() != data.len() {
        *cache = AssignmentCache::new(data.len());
    }
    let prune = prune && k > 1 && !centroids[0].is_symbolic();
    let mut stats = AssignStats::default();

    cache.inter = Array2::zeros((k, k));
    if prune {
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
        let d = pairs
            .par_iter()
            .map(|&(a, b)| wasserstein2(&centroids[a], &centroids[b]))
            .collect::<Result<Vec<_>>>()?;
        for (&(a, b), v) in pairs.iter().zip(d) {
            cache.inter[[a, b]] = v;
            cache.inter[[b, a]] = v;
        }
        stats.inter_evaluations = pairs.len();
    }
    let inter = &cache.inter;

    let results = data
        .par_iter()
        .zip(cache.labels.par_iter())
        .map(|(x, prev)| -> Result<(usize, f64, usize)> {
            if !prune {
                let mut best = (0, f64::INFINITY);
                for (c, centroid) in centroids.iter().enumerate() {
                    let d = wasserstein2(x, centroid)?;
                    if d < best.1 {
                        best = (c, d);
                    }
                }
                return Ok((best.0, best.1, k));
            }
            let start = prev.filter(|&l| l < k).unwrap_or(0);
            let mut best = (start, wasserstein2(x, &centroids[start])?);
            let mut evals = 1;
            for c in 0..k {
                if c == start {
                    continue;
                }
                if inter[[best.0, c]] >= 2.0 * best.1 * (1.0 + PRUNE_REL) + PRUNE_ABS {
                    continue;
                }
                let d = wasserstein2(x, &centroids[c])?;
                evals += 1;
                if d < best.1 || (d == best.1 && c < best.0) {
                    best = (c, d);
                }
            }
            Ok((best.0, best.1, evals))
        })
        .collect::<Result<Vec<_>>>()?;

    for (i, (label, dist, evals)) in results.into_iter().enumerate() {
        stats.evaluations += evals;
        if cache.labels[i] != Some(label) {
            stats.changes += 1;
        }
        cache.labels[i] = Some(label);
        cache.distances[i] = dist;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dist(rng: &mut ChaCha8Rng, center: f64) -> DiscreteDistribution {
        let m = rng.random_range(1..5);
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        let x: Vec<f64> = (0..m * 2).map(|_| center + rng.random_range(-1.0..1.0)).collect();
        DiscreteDistribution::from_flat(w.iter().map(|v| v / s).collect(), 2, x).unwrap()
    }

    #[test]
    fn single_centroid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data: Vec<_> = (0..10).map(|_| random_dist(&mut rng, 0.0)).collect();
        let mut cache = AssignmentCache::new(data.len());
        let s = assign_labels(&data, &data[..1], &mut cache, true).unwrap();
        assert!(cache.label_vec().iter().all(|l| *l == 0));
        assert_eq!(s.evaluations, data.len());
        assert_eq!(s.inter_evaluations, 0);
    }

    #[test]
    fn object_equal_to_centroid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data: Vec<_> = (0..6).map(|i| random_dist(&mut rng, i as f64 * 5.0)).collect();
        let centroids = vec![data[4].clone(), data[1].clone()];
        for prune in [false, true] {
            let mut cache = AssignmentCache::new(data.len());
            assign_labels(&data, &centroids, &mut cache, prune).unwrap();
            assert_eq!(cache.labels[4], Some(0));
            assert_eq!(cache.labels[1], Some(1));
            assert_eq!(cache.distances[4], 0.0);
        }
    }

    #[test]
    fn pruning_preserves_labels_and_saves_work() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<_> = (0..50).map(|i| random_dist(&mut rng, (i % 4) as f64 * 6.0)).collect();
        let centroids: Vec<_> = (0..4).map(|c| random_dist(&mut rng, c as f64 * 6.0)).collect();
        let mut full = AssignmentCache::new(data.len());
        let a = assign_labels(&data, &centroids, &mut full, false).unwrap();
        let mut pruned = AssignmentCache::new(data.len());
        let b = assign_labels(&data, &centroids, &mut pruned, true).unwrap();
        assert_eq!(full.labels, pruned.labels);
        assert_eq!(full.distances, pruned.distances);
        assert!(b.evaluations < a.evaluations, "{} vs {}", b.evaluations, a.evaluations);
        // a second round starting from cached labels stays consistent
        let c = assign_labels(&data, &centroids, &mut pruned, true).unwrap();
        assert_eq!(c.changes, 0);
        assert_eq!(full.labels, pruned.labels);
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let x = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        let c0 = DiscreteDistribution::point_mass(&[-1.0]).unwrap();
        let c1 = DiscreteDistribution::point_mass(&[1.0]).unwrap();
        for prune in [false, true] {
            let mut cache = AssignmentCache::new(1);
            cache.labels[0] = Some(1);
            assign_labels(std::slice::from_ref(&x), &[c0.clone(), c1.clone()], &mut cache, prune).unwrap();
            assert_eq!(cache.labels[0], Some(0));
        }
    }

    #[test]
    fn inter_distances_are_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<_> = (0..5).map(|_| random_dist(&mut rng, 0.0)).collect();
        let mut cache = AssignmentCache::new(data.len());
        assign_labels(&data, &data, &mut cache, true).unwrap();
        for a in 0..5 {
            assert_eq!(cache.inter[[a, a]], 0.0);
            for b in 0..5 {
                assert_eq!(cache.inter[[a, b]], cache.inter[[b, a]]);
                assert!(cache.inter[[a, b]] >= 0.0);
            }
        }
    }
}
