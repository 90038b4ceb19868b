//! D2-clustering: K-means style alternation of W2 assignment and
//! Wasserstein barycenter updates.

mod assign;
mod init;

pub use assign::{assign_labels, AssignStats, AssignmentCache};
pub use init::{fit_support, greedy_merge, init_centroid, pad_support, seed_centroids, Seeding};

use std::io::Write;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::barycenter::admm::{admm_centroid, AdmmParams};
use crate::barycenter::badmm::{badmm_centroid, BadmmParams};
use crate::barycenter::subgrad::{subgrad_centroid, SubgradParams};
use crate::barycenter::{Budget, Centroid, SolveStats, WarmStart};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};

/// Centroid update method used inside the clustering loop.
#[derive(Debug, Clone, PartialEq)]
pub enum CentroidSolver {
    Badmm(BadmmParams),
    Admm(AdmmParams),
    Subgrad(SubgradParams),
}

impl Default for CentroidSolver {
    fn default() -> Self {
        CentroidSolver::Badmm(BadmmParams::default())
    }
}

impl CentroidSolver {
    fn uses_warm_start(&self) -> bool {
        !matches!(self, CentroidSolver::Subgrad(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    pub k: usize,
    /// Centroid support size; defaults to the rounded mean support size.
    pub m: Option<usize>,
    pub solver: CentroidSolver,
    /// Cap on outer rounds.
    pub max_outer: usize,
    /// Stop once fewer than `max(1, change_fraction * N)` labels change.
    pub change_fraction: f64,
    pub prune: bool,
    pub seeding: Seeding,
    pub seed: u64,
    /// Worker threads; 0 runs on the ambient rayon pool.
    pub workers: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            k: 2,
            m: None,
            solver: CentroidSolver::default(),
            max_outer: 50,
            change_fraction: 0.001,
            prune: true,
            seeding: Seeding::default(),
            seed: 0,
            workers: 0,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidParameter(format!("k must be in 1..={n}, got {}", self.k)));
        }
        if self.m == Some(0) || self.max_outer == 0 || !(self.change_fraction >= 0.0) {
            return Err(Error::InvalidParameter(
                "m and max_outer must be positive, change_fraction non-negative".into(),
            ));
        }
        match &self.solver {
            CentroidSolver::Badmm(p) => p.validate(),
            CentroidSolver::Admm(p) => p.validate(),
            CentroidSolver::Subgrad(p) => p.validate(),
        }
    }
}

/// One entry of the objective trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub outer_iter: usize,
    /// Sum over objects of the squared W2 distance to their centroid.
    pub objective: f64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub centroids: Vec<Centroid>,
    pub labels: Vec<usize>,
    pub objective_trace: Vec<TracePoint>,
    /// Object-to-centroid distance evaluations over all rounds.
    pub evaluations: usize,
    pub outer_iters: usize,
}

impl ClusterModel {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().map_or(f64::NAN, |t| t.objective)
    }
}

/// Cached solver state (coupling, and dual where the solver keeps one) of
/// each object with the centroid of the cluster it was in when it was last
/// used in a centroid update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WarmCache {
    entries: Vec<Option<(usize, WarmStart)>>,
}

impl WarmCache {
    pub fn new(n: usize) -> Self {
        Self { entries: vec![None; n] }
    }

    /// State to start from for `object` as a member of `label`: the cached
    /// one if the object stayed in that cluster, otherwise `None` (the solver
    /// then uses the product coupling and a zero dual).
    pub fn warm_for(&self, object: usize, label: usize) -> Option<&WarmStart> {
        match &self.entries[object] {
            Some((l, ws)) if *l == label => Some(ws),
            _ => None,
        }
    }

    pub fn store(&mut self, object: usize, label: usize, warm: WarmStart) {
        self.entries[object] = Some((label, warm));
    }
}

fn default_m(data: &[DiscreteDistribution]) -> usize {
    let total: usize = data.iter().map(|p| p.len()).sum();
    ((total as f64 / data.len() as f64).round() as usize).max(1)
}

/// Solver initial weights must be strictly positive; nudge exact zeros.
fn positive_weights(c: &DiscreteDistribution) -> Result<DiscreteDistribution> {
    if c.weights().iter().all(|w| *w > 0.0) {
        return Ok(c.clone());
    }
    let m = c.len() as f64;
    let w = c.weights().iter().map(|w| (1.0 - 1e-9) * w + 1e-9 / m).collect();
    c.with_weights(w).or_else(|_| DiscreteDistribution::from_parts(vec![1.0 / m; c.len()], c.support().clone()))
}

struct UpdateOutcome {
    centroid: Centroid,
    warm: Option<Vec<WarmStart>>,
    stats: SolveStats,
}

fn update_centroid(
    solver: &CentroidSolver,
    members: &[&DiscreteDistribution],
    init: &DiscreteDistribution,
    warm: &[Option<WarmStart>],
    budget: Budget,
) -> Result<UpdateOutcome> {
    let init = positive_weights(init)?;
    Ok(match solver {
        CentroidSolver::Badmm(p) => {
            let out = badmm_centroid(members, &init, Some(warm), p, budget)?;
            UpdateOutcome { centroid: out.centroid, warm: Some(out.state.warm_starts()), stats: out.stats }
        }
        CentroidSolver::Admm(p) => {
            let couplings: Vec<Option<Array2<f64>>> =
                warm.iter().map(|w| w.as_ref().map(|w| w.coupling.clone())).collect();
            let out = admm_centroid(members, &init, Some(&couplings), p, budget)?;
            UpdateOutcome {
                centroid: out.centroid,
                warm: Some(out.plans.into_iter().map(WarmStart::coupling).collect()),
                stats: out.stats,
            }
        }
        CentroidSolver::Subgrad(p) => {
            let out = subgrad_centroid(members, &init, p, budget)?;
            UpdateOutcome { centroid: out.centroid, warm: None, stats: out.stats }
        }
    })
}

/// Mutable state of a clustering run.
struct Run<'a> {
    data: &'a [DiscreteDistribution],
    params: &'a ClusterParams,
    m: usize,
    centroids: Vec<Centroid>,
    cache: AssignmentCache,
    warm: WarmCache,
    evaluations: usize,
}

impl<'a> Run<'a> {
    fn start(data: &'a [DiscreteDistribution], params: &'a ClusterParams) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput("data"));
        }
        params.validate(data.len())?;
        let m = params.m.unwrap_or_else(|| default_m(data));
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let seeds = seed_centroids(data, params.k, m, params.seeding, &mut rng)?;
        let centroids = seeds
            .into_iter()
            .map(|distribution| Centroid { distribution, objective: f64::NAN })
            .collect();
        Ok(Self {
            data,
            params,
            m,
            centroids,
            cache: AssignmentCache::new(data.len()),
            warm: WarmCache::new(data.len()),
            evaluations: 0,
        })
    }

    fn distributions(&self) -> Vec<DiscreteDistribution> {
        self.centroids.iter().map(|c| c.distribution.clone()).collect()
    }

    /// Assignment step followed by empty-cluster repair; returns the number
    /// of changed labels and the total squared distance.
    fn assign(&mut self) -> Result<(usize, f64)> {
        let before = self.cache.labels.clone();
        let stats = assign_labels(self.data, &self.distributions(), &mut self.cache, self.params.prune)?;
        self.evaluations += stats.evaluations;
        self.repair_empty()?;
        let changes = before.iter().zip(&self.cache.labels).filter(|(a, b)| a != b).count();
        let total = self.cache.distances.iter().map(|d| d * d).sum();
        Ok((changes, total))
    }

    /// Reseeds every empty cluster from the object farthest from its
    /// centroid, taken from a cluster with more than one member.
    fn repair_empty(&mut self) -> Result<()> {
        let k = self.centroids.len();
        loop {
            let mut sizes = vec![0usize; k];
            for l in self.cache.labels.iter().flatten() {
                sizes[*l] += 1;
            }
            let Some(empty) = sizes.iter().position(|s| *s == 0) else {
                return Ok(());
            };
            let far = (0..self.data.len())
                .filter(|&i| sizes[self.cache.labels[i].expect("assigned")] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if self.cache.distances[b] >= self.cache.distances[i] => Some(b),
                    _ => Some(i),
                })
                .ok_or_else(|| Error::InvalidParameter("cannot fill empty cluster".into()))?;
            let distribution = fit_support(&self.data[far], self.m)?;
            let d = crate::transport::wasserstein2(&self.data[far], &distribution)?;
            self.evaluations += 1;
            self.centroids[empty] = Centroid { distribution, objective: f64::NAN };
            self.cache.labels[far] = Some(empty);
            self.cache.distances[far] = d;
        }
    }

    /// Updates every centroid from its members. `budget_for` gives the time
    /// allowance of each centroid update (measured from its start). Returns
    /// the number of updates discarded because not a single solver
    /// iteration finished within budget.
    fn update(&mut self, budget_for: Option<Duration>) -> Result<usize> {
        let labels = self.cache.label_vec();
        let mut skipped = 0;
        for c in 0..self.centroids.len() {
            let idx: Vec<usize> = (0..self.data.len()).filter(|&i| labels[i] == c).collect();
            if idx.is_empty() {
                continue;
            }
            let members: Vec<&DiscreteDistribution> = idx.iter().map(|&i| &self.data[i]).collect();
            let warm: Vec<Option<WarmStart>> = if self.params.solver.uses_warm_start() {
                idx.iter().map(|&i| self.warm.warm_for(i, c).cloned()).collect()
            } else {
                vec![None; idx.len()]
            };
            let budget = budget_for.map_or(Budget::unlimited(), |b| Budget::until(Instant::now() + b));
            let out = update_centroid(&self.params.solver, &members, &self.centroids[c].distribution, &warm, budget)?;
            if budget_for.is_some() && out.stats.within_budget == 0 {
                skipped += 1;
                continue;
            }
            if let Some(states) = out.warm {
                for (&i, ws) in idx.iter().zip(states) {
                    self.warm.store(i, c, ws);
                }
            }
            self.centroids[c] = out.centroid;
        }
        Ok(skipped)
    }

    fn into_model(self, trace: Vec<TracePoint>, outer_iters: usize) -> ClusterModel {
        ClusterModel {
            labels: self.cache.label_vec(),
            centroids: self.centroids,
            objective_trace: trace,
            evaluations: self.evaluations,
            outer_iters,
        }
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Runs D2-clustering. Centroids start from seed objects fitted to `m`
/// support points; each round updates every centroid from its members and
/// reassigns all objects, until few labels change or `max_outer` rounds.
///
/// Members that kept their label warm-start from the coupling cached in the
/// previous round; the others start from the product coupling.
pub fn d2_cluster(data: &[DiscreteDistribution], params: &ClusterParams) -> Result<ClusterModel> {
    with_workers(params.workers, || {
        let t0 = Instant::now();
        let mut run = Run::start(data, params)?;
        let threshold = ((params.change_fraction * data.len() as f64).floor() as usize).max(1);
        let (_, total) = run.assign()?;
        let mut trace = vec![TracePoint { outer_iter: 0, objective: total, elapsed: t0.elapsed() }];
        let mut outer = 0;
        while outer < params.max_outer {
            outer += 1;
            run.update(None)?;
            let (changes, total) = run.assign()?;
            trace.push(TracePoint { outer_iter: outer, objective: total, elapsed: t0.elapsed() });
            if changes < threshold {
                break;
            }
        }
        fill_objectives(&mut run)?;
        Ok(run.into_model(trace, outer))
    })
}

/// Per-centroid objectives (mean squared W2 over members), from the cached
/// assignment distances.
fn fill_objectives(run: &mut Run<'_>) -> Result<()> {
    let k = run.centroids.len();
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (l, d) in run.cache.labels.iter().zip(&run.cache.distances) {
        let l = l.expect("assigned");
        sum[l] += d * d;
        count[l] += 1;
    }
    for c in 0..k {
        run.centroids[c].objective = if count[c] > 0 { sum[c] / count[c] as f64 } else { 0.0 };
    }
    Ok(())
}

/// One row of the time-budget profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRecord {
    pub outer_iter: usize,
    pub elapsed: Duration,
    pub objective: f64,
    pub label_changes: usize,
    /// Centroid updates discarded because no solver iteration fit in the budget.
    pub skipped: usize,
}

/// Time-budget profiling: each round times the assignment step (`T_a`) and
/// then gives every centroid update a budget of `eta * T_a / K`. Rounds
/// continue until `t_total` has elapsed.
pub fn profile_run(
    data: &[DiscreteDistribution],
    params: &ClusterParams,
    eta: f64,
    t_total: Duration,
) -> Result<(ClusterModel, Vec<ProfileRecord>)> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter("eta must be positive".into()));
    }
    with_workers(params.workers, || {
        let t0 = Instant::now();
        let mut run = Run::start(data, params)?;
        let mut trace = Vec::new();
        let mut log = Vec::new();
        let mut outer = 0;
        loop {
            let ta = Instant::now();
            let (changes, total) = run.assign()?;
            let t_a = ta.elapsed();
            let elapsed = t0.elapsed();
            trace.push(TracePoint { outer_iter: outer, objective: total, elapsed });
            if elapsed >= t_total {
                log.push(ProfileRecord { outer_iter: outer, elapsed, objective: total, label_changes: changes, skipped: 0 });
                break;
            }
            let budget = t_a.mul_f64(eta / params.k as f64);
            let skipped = run.update(Some(budget))?;
            log.push(ProfileRecord { outer_iter: outer, elapsed, objective: total, label_changes: changes, skipped });
            outer += 1;
        }
        fill_objectives(&mut run)?;
        Ok((run.into_model(trace, outer), log))
    })
}

/// Writes a profile log as CSV.
pub fn write_profile_csv<W: Write>(mut w: W, log: &[ProfileRecord]) -> Result<()> {
    writeln!(w, "outer_iter,elapsed_sec,objective,label_changes,skipped")?;
    for r in log {
        writeln!(
            w,
            "{},{:.6},{:.17e},{},{}",
            r.outer_iter,
            r.elapsed.as_secs_f64(),
            r.objective,
            r.label_changes,
            r.skipped
        )?;
    }
    Ok(())
}

/// Writes an objective trace as CSV. Timings are left out so that repeated
/// runs give identical files; [`write_profile_csv`] is the timed log.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TracePoint]) -> Result<()> {
    writeln!(w, "outer_iter,objective")?;
    for t in trace {
        writeln!(w, "{},{:.17e}", t.outer_iter, t.objective)?;
    }
    Ok(())
}
