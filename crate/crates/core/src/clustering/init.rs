//! Centroid initialization by greedy merging of support points.

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

use crate::distribution::{DiscreteDistribution, Support};
use crate::error::{Error, Result};
use crate::transport::wasserstein2_squared;

/// Merge cost of two support points: `w_i w_j c(x_i, x_j) / (w_i + w_j)`.
fn merge_cost(wi: f64, wj: f64, c: f64) -> f64 {
    let s = wi + wj;
    if s > 0.0 {
        wi * wj * c / s
    } else {
        0.0
    }
}

/// Repeatedly merges the pair of support points with the smallest merge
/// cost until `m` points remain. Vector points merge to their weighted mean;
/// symbols merge into the heavier symbol (the lower index on ties).
/// Distributions with at most `m` points are returned unchanged.
pub fn greedy_merge(p: &DiscreteDistribution, m: usize) -> Result<DiscreteDistribution> {
    if m == 0 {
        return Err(Error::InvalidParameter("support size must be positive".into()));
    }
    let mut w = p.weights().to_vec();
    match p.support() {
        Support::Vectors(x) => {
            let mut pts: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
            while w.len() > m {
                let (i, j) = best_pair(&w, |a, b| {
                    pts[a].iter().zip(&pts[b]).map(|(u, v)| (u - v) * (u - v)).sum()
                });
                let s = w[i] + w[j];
                if s > 0.0 {
                    for c in 0..pts[i].len() {
                        pts[i][c] = (w[i] * pts[i][c] + w[j] * pts[j][c]) / s;
                    }
                }
                w[i] = s;
                w.remove(j);
                pts.remove(j);
            }
            let d = x.ncols();
            let flat: Vec<f64> = pts.into_iter().flatten().collect();
            let points = Array2::from_shape_vec((w.len(), d), flat).expect("shape");
            DiscreteDistribution::from_parts_normalized(w, Support::Vectors(points))
        }
        Support::Symbolic { table, indices } => {
            let mut idx = indices.clone();
            while w.len() > m {
                let (i, j) = best_pair(&w, |a, b| table.cost(idx[a], idx[b]));
                if w[j] > w[i] {
                    idx[i] = idx[j];
                }
                w[i] += w[j];
                w.remove(j);
                idx.remove(j);
            }
            DiscreteDistribution::from_parts_normalized(
                w,
                Support::Symbolic { table: table.clone(), indices: idx },
            )
        }
    }
}

/// First pair `(i, j)`, `i < j`, in lexicographic order with the smallest
/// merge cost.
fn best_pair(w: &[f64], cost: impl Fn(usize, usize) -> f64) -> (usize, usize) {
    let mut best = (0, 1);
    let mut best_v = f64::INFINITY;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            let v = merge_cost(w[i], w[j], cost(i, j));
            if v < best_v {
                best_v = v;
                best = (i, j);
            }
        }
    }
    best
}

/// Grows a distribution to `m` points by repeatedly splitting its heaviest
/// point into two copies of half the weight.
pub fn pad_support(p: &DiscreteDistribution, m: usize) -> Result<DiscreteDistribution> {
    let mut w = p.weights().to_vec();
    let mut rows: Vec<usize> = (0..w.len()).collect();
    while w.len() < m {
        let h = (0..w.len()).fold(0, |b, i| if w[i] > w[b] { i } else { b });
        w[h] /= 2.0;
        w.push(w[h]);
        rows.push(rows[h]);
    }
    let support = match p.support() {
        Support::Vectors(x) => Support::Vectors(x.select(ndarray::Axis(0), &rows)),
        Support::Symbolic { table, indices } => Support::Symbolic {
            table: table.clone(),
            indices: rows.iter().map(|&r| indices[r]).collect(),
        },
    };
    DiscreteDistribution::from_parts(w, support)
}

/// Reduces or grows `p` to exactly `m` support points.
pub fn fit_support(p: &DiscreteDistribution, m: usize) -> Result<DiscreteDistribution> {
    if p.len() >= m {
        greedy_merge(p, m)
    } else {
        pad_support(p, m)
    }
}

/// Centroid with `m` support points for a set of members: a randomly chosen
/// member with at least `m` points, greedily merged down to `m`. When no
/// member is large enough, the largest member is padded instead.
pub fn init_centroid<D, R>(members: &[D], m: usize, rng: &mut R) -> Result<DiscreteDistribution>
where
    D: AsRef<DiscreteDistribution>,
    R: Rng + ?Sized,
{
    if members.is_empty() {
        return Err(Error::EmptyInput("members"));
    }
    let eligible: Vec<usize> = (0..members.len()).filter(|&k| members[k].as_ref().len() >= m).collect();
    if eligible.is_empty() {
        let largest = (0..members.len()).fold(0, |b, k| {
            if members[k].as_ref().len() > members[b].as_ref().len() {
                k
            } else {
                b
            }
        });
        return pad_support(members[largest].as_ref(), m);
    }
    let pick = eligible[rng.random_range(0..eligible.len())];
    greedy_merge(members[pick].as_ref(), m)
}

/// How the initial K centroids are chosen among the objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Seeding {
    /// K distinct objects drawn uniformly without replacement.
    Uniform,
    /// First object uniform, then each next object drawn with probability
    /// proportional to its squared distance to the nearest chosen one.
    #[default]
    Distance,
}

/// Picks `k` distinct seed objects and fits each to `m` support points.
pub fn seed_centroids<R: Rng + ?Sized>(
    data: &[DiscreteDistribution],
    k: usize,
    m: usize,
    seeding: Seeding,
    rng: &mut R,
) -> Result<Vec<DiscreteDistribution>> {
    if k == 0 || k > data.len() {
        return Err(Error::InvalidParameter(format!(
            "k must be in 1..={}, got {k}",
            data.len()
        )));
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    match seeding {
        Seeding::Uniform => {
            chosen = rand::seq::index::sample(rng, data.len(), k).into_vec();
        }
        Seeding::Distance => {
            chosen.push(rng.random_range(0..data.len()));
            let mut nearest = vec![f64::INFINITY; data.len()];
            while chosen.len() < k {
                let last = &data[*chosen.last().expect("non-empty")];
                let d2 = data
                    .par_iter()
                    .map(|p| wasserstein2_squared(p, last))
                    .collect::<Result<Vec<_>>>()?;
                for (n, d) in nearest.iter_mut().zip(d2) {
                    *n = n.min(d);
                }
                for &c in &chosen {
                    nearest[c] = 0.0;
                }
                let total: f64 = nearest.iter().sum();
                let next = if total > 0.0 {
                    let mut u = rng.random::<f64>() * total;
                    let mut pick = None;
                    for (i, &v) in nearest.iter().enumerate() {
                        if v > 0.0 {
                            pick = Some(i);
                            if u < v {
                                break;
                            }
                            u -= v;
                        }
                    }
                    pick.expect("positive total")
                } else {
                    // every object coincides with a seed: fall back to uniform
                    let free: Vec<usize> = (0..data.len()).filter(|i| !chosen.contains(i)).collect();
                    free[rng.random_range(0..free.len())]
                };
                chosen.push(next);
            }
        }
    }
    chosen.iter().map(|&i| fit_support(&data[i], m)).collect()
}
