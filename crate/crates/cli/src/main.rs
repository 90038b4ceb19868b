//! `d2clust` command-line tool.
//!
//! Errors are reported as one line on stderr,
//! `error: kind=<kind> message=<text>`, with exit code 2 for bad input or
//! flags and 3 for a solver failure.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use d2clust::barycenter::admm::{admm_centroid, AdmmParams};
use d2clust::barycenter::badmm::{badmm_centroid, BadmmParams, ConsensusRule};
use d2clust::barycenter::fulllp::{fulllp_centroid, FullLpParams};
use d2clust::barycenter::ibp::{ibp_centroid, IbpParams, IbpVariant};
use d2clust::barycenter::subgrad::{subgrad_centroid, SubgradParams};
use d2clust::clustering::{
    d2_cluster, init_centroid, profile_run, write_profile_csv, write_trace_csv, CentroidSolver, ClusterParams,
    Seeding,
};
use d2clust::dataio::{
    generate_synthetic, read_cost_table, read_dataset, read_labels, write_dataset, write_labels, SynthSpec,
    TableRegistry,
};
use d2clust::metrics::{ami, ari, homogeneity_completeness, ContingencyTable};
use d2clust::{wasserstein2, Budget, DiscreteDistribution, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "d2clust", version, about = "Clustering of discrete distributions under the Wasserstein distance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise W2 distances between two datasets, as a CSV matrix.
    Distance(DistanceArgs),
    /// Wasserstein barycenter of every distribution in a dataset.
    Barycenter(BarycenterArgs),
    /// D2-clustering.
    Cluster(ClusterArgs),
    /// Synthetic dataset with planted groups.
    Gen(GenArgs),
    /// Compare two label files.
    Eval(EvalArgs),
    /// Clustering under the per-round time budget, logging objective over time.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct Tables {
    /// Cost table for symbolic supports, as ID=PATH; repeatable.
    #[arg(long = "cost-table", value_name = "ID=PATH")]
    cost_tables: Vec<String>,
}

#[derive(Args)]
struct DistanceArgs {
    a: PathBuf,
    b: PathBuf,
    #[command(flatten)]
    tables: Tables,
    /// Output CSV (default stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum SolverKind {
    #[default]
    Badmm,
    Admm,
    Subgrad,
    Ibp,
    Fulllp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    R1,
    R2,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Fixed,
    V1,
    V2,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum SeedingArg {
    #[default]
    D2,
    Uniform,
}

/// Centroid solver flags. Unset flags keep the solver defaults; a flag that
/// the chosen solver does not take is rejected.
#[derive(Args)]
struct SolverOpts {
    #[arg(long, value_enum, default_value_t)]
    solver: SolverKind,
    /// Centroid support size (default: rounded mean support size).
    #[arg(long)]
    m: Option<usize>,
    /// Penalty scale (badmm, admm).
    #[arg(long)]
    rho0: Option<f64>,
    /// Support update period (badmm, subgrad, ibp).
    #[arg(long)]
    tau: Option<usize>,
    /// Iterations per centroid update (badmm, subgrad, ibp; ADMM sweeps per round for admm).
    #[arg(long)]
    iters: Option<usize>,
    /// Weight consensus rule (badmm).
    #[arg(long, value_enum)]
    rule: Option<Rule>,
    /// Support update rounds (admm, fulllp).
    #[arg(long)]
    outer_iters: Option<usize>,
    /// Step size (subgrad).
    #[arg(long)]
    alpha: Option<f64>,
    /// Step multiplier cap (subgrad).
    #[arg(long)]
    zeta: Option<f64>,
    /// Entropic regularization relative to the mean cost (ibp).
    #[arg(long)]
    epsilon0: Option<f64>,
    /// Support handling (ibp).
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    /// Keep the initial support points.
    #[arg(long)]
    fixed_support: bool,
}

#[derive(Args)]
struct BarycenterArgs {
    input: PathBuf,
    #[command(flatten)]
    tables: Tables,
    #[command(flatten)]
    solver: SolverOpts,
    /// Centroid D2S file (default stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// B-ADMM residual CSV.
    #[arg(long)]
    residuals: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct RunOpts {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Disable triangle-inequality pruning in the assignment step.
    #[arg(long)]
    no_prune: bool,
    #[arg(long, value_enum, default_value_t)]
    seeding: SeedingArg,
}

#[derive(Args)]
struct ClusterArgs {
    input: PathBuf,
    #[command(flatten)]
    tables: Tables,
    #[command(flatten)]
    run: RunOpts,
    #[command(flatten)]
    solver: SolverOpts,
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    /// Labels, one per line (default stdout).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Centroids as D2S.
    #[arg(long)]
    centroids: Option<PathBuf>,
    /// Objective per round, CSV `outer_iter,objective`.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    clusters: usize,
    /// Spread of the group means in units of the noise scale.
    #[arg(long)]
    sep: f64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Dirichlet concentration of the weights.
    #[arg(long)]
    alpha: Option<f64>,
    /// Degrees of freedom of the Student-t perturbation.
    #[arg(long)]
    dof: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset D2S file (default stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Planted group labels.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Ami,
    Ari,
    Hc,
    All,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::All)]
    metric: Metric,
}

#[derive(Args)]
struct ProfileArgs {
    input: PathBuf,
    #[command(flatten)]
    tables: Tables,
    #[command(flatten)]
    run: RunOpts,
    #[command(flatten)]
    solver: SolverOpts,
    /// Centroid update budget as a multiple of the assignment time per centroid.
    #[arg(long, default_value_t = 2.0)]
    eta: f64,
    /// Total run time in seconds.
    #[arg(long)]
    t_total: f64,
    /// Profile CSV (default stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, kind: "usage", message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_solver_failure() { 3 } else { 2 }, kind: e.kind(), message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type Res<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help, --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail(Failure::usage(first));
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    let message = f.message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error: kind={} message={message}", f.kind);
    ExitCode::from(f.code)
}

fn run(command: Command) -> Res<()> {
    match command {
        Command::Distance(a) => pool(a.workers, || distance(&a)),
        Command::Barycenter(a) => pool(a.workers, || barycenter(&a)),
        Command::Cluster(a) => pool(a.run.workers, || cluster(&a)),
        Command::Gen(a) => generate(&a),
        Command::Eval(a) => evaluate(&a),
        Command::Profile(a) => pool(a.run.workers, || profile(&a)),
    }
}

/// Runs `f` on a pool of `workers` threads (0 = rayon's default size).
fn pool<T: Send>(workers: usize, f: impl FnOnce() -> Res<T> + Send) -> Res<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::usage(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn open(path: &Path) -> Res<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

/// Output file, or stdout when no path is given.
fn create(path: Option<&Path>) -> Res<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// Attaches the file name to parse errors.
fn in_file<T>(path: &Path, r: d2clust::Result<T>) -> Res<T> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn registry(t: &Tables) -> Res<TableRegistry> {
    let mut reg = TableRegistry::new();
    for spec in &t.cost_tables {
        let (id, path) = spec
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--cost-table expects ID=PATH, got {spec:?}")))?;
        let path = Path::new(path);
        let table = in_file(path, read_cost_table(open(path)?, id))?;
        reg.insert(table);
    }
    Ok(reg)
}

fn load(path: &Path, reg: &TableRegistry) -> Res<Vec<DiscreteDistribution>> {
    let data = in_file(path, read_dataset(open(path)?, reg))?;
    if data.is_empty() {
        return Err(Error::EmptyInput("dataset").into());
    }
    Ok(data)
}

fn load_labels(path: &Path) -> Res<Vec<usize>> {
    in_file(path, read_labels(open(path)?))
}

fn distance(a: &DistanceArgs) -> Res<()> {
    let reg = registry(&a.tables)?;
    let xs = load(&a.a, &reg)?;
    let ys = load(&a.b, &reg)?;
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|x| ys.iter().map(|y| wasserstein2(x, y)).collect::<d2clust::Result<_>>())
        .collect::<d2clust::Result<_>>()?;
    let mut out = create(a.output.as_deref())?;
    let header: Vec<String> = (0..ys.len()).map(|j| format!("b{j}")).collect();
    writeln!(out, "a,{}", header.join(","))?;
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{i},{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

impl SolverOpts {
    /// Rejects flags that the chosen solver does not take.
    fn check(&self) -> Res<()> {
        use SolverKind::*;
        let s = self.solver;
        let given: [(&str, bool, &[SolverKind]); 9] = [
            ("--rho0", self.rho0.is_some(), &[Badmm, Admm]),
            ("--tau", self.tau.is_some(), &[Badmm, Subgrad, Ibp]),
            ("--iters", self.iters.is_some(), &[Badmm, Admm, Subgrad, Ibp]),
            ("--rule", self.rule.is_some(), &[Badmm]),
            ("--outer-iters", self.outer_iters.is_some(), &[Admm, Fulllp]),
            ("--alpha", self.alpha.is_some(), &[Subgrad]),
            ("--zeta", self.zeta.is_some(), &[Subgrad]),
            ("--epsilon0", self.epsilon0.is_some(), &[Ibp]),
            ("--variant", self.variant.is_some(), &[Ibp]),
        ];
        for (flag, set, allowed) in given {
            if set && !allowed.contains(&s) {
                let name = s.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
                return Err(Failure::usage(format!("{flag} does not apply to --solver {name}")));
            }
        }
        if s == Ibp && self.fixed_support && matches!(self.variant, Some(Variant::V1 | Variant::V2)) {
            return Err(Failure::usage("--fixed-support conflicts with --variant v1/v2"));
        }
        if self.m == Some(0) {
            return Err(Failure::usage("--m must be positive"));
        }
        Ok(())
    }

    fn badmm(&self) -> BadmmParams {
        let d = BadmmParams::default();
        BadmmParams {
            rho0: self.rho0.unwrap_or(d.rho0),
            tau: self.tau.unwrap_or(d.tau),
            inner_iters: self.iters.unwrap_or(d.inner_iters),
            rule: match self.rule {
                Some(Rule::R2) => ConsensusRule::R2,
                Some(Rule::R1) | None => ConsensusRule::R1,
            },
            fixed_support: self.fixed_support,
            ..d
        }
    }

    fn admm(&self) -> AdmmParams {
        let d = AdmmParams::default();
        AdmmParams {
            rho0: self.rho0.unwrap_or(d.rho0),
            t_admm: self.iters.unwrap_or(d.t_admm),
            outer_iters: self.outer_iters.unwrap_or(d.outer_iters),
            fixed_support: self.fixed_support,
            ..d
        }
    }

    fn subgrad(&self) -> SubgradParams {
        let d = SubgradParams::default();
        SubgradParams {
            alpha: self.alpha.unwrap_or(d.alpha),
            zeta: self.zeta.unwrap_or(d.zeta),
            tau: self.tau.unwrap_or(d.tau),
            iters: self.iters.unwrap_or(d.iters),
            fixed_support: self.fixed_support,
        }
    }

    fn ibp(&self) -> IbpParams {
        let d = IbpParams::default();
        let variant = match self.variant {
            Some(Variant::V1) => IbpVariant::V1,
            Some(Variant::V2) => IbpVariant::V2,
            Some(Variant::Fixed) | None => IbpVariant::FixedSupport,
        };
        IbpParams {
            epsilon0: self.epsilon0.unwrap_or(d.epsilon0),
            iters: self.iters.unwrap_or(d.iters),
            tau: self.tau.unwrap_or(d.tau),
            variant,
        }
    }

    fn fulllp(&self) -> FullLpParams {
        let d = FullLpParams::default();
        FullLpParams { outer_iters: self.outer_iters.unwrap_or(d.outer_iters), fixed_support: self.fixed_support }
    }

    fn centroid_solver(&self) -> Res<CentroidSolver> {
        self.check()?;
        Ok(match self.solver {
            SolverKind::Badmm => CentroidSolver::Badmm(self.badmm()),
            SolverKind::Admm => CentroidSolver::Admm(self.admm()),
            SolverKind::Subgrad => CentroidSolver::Subgrad(self.subgrad()),
            SolverKind::Ibp | SolverKind::Fulllp => {
                return Err(Failure::usage("clustering supports --solver badmm, admm or subgrad"))
            }
        })
    }
}

fn mean_support(data: &[DiscreteDistribution]) -> usize {
    let total: usize = data.iter().map(DiscreteDistribution::len).sum();
    ((total as f64 / data.len() as f64).round() as usize).max(1)
}

fn barycenter(a: &BarycenterArgs) -> Res<()> {
    let o = &a.solver;
    o.check()?;
    if a.residuals.is_some() && o.solver != SolverKind::Badmm {
        return Err(Failure::usage("--residuals is only available with --solver badmm"));
    }
    let reg = registry(&a.tables)?;
    let data = load(&a.input, &reg)?;
    let m = o.m.unwrap_or_else(|| mean_support(&data));
    let init = init_centroid(&data, m, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
    let budget = Budget::unlimited();
    let (centroid, residuals) = match o.solver {
        SolverKind::Badmm => {
            let out = badmm_centroid(&data, &init, None, &o.badmm(), budget)?;
            (out.centroid, Some(out.trace))
        }
        SolverKind::Admm => (admm_centroid(&data, &init, None, &o.admm(), budget)?.centroid, None),
        SolverKind::Subgrad => (subgrad_centroid(&data, &init, &o.subgrad(), budget)?.centroid, None),
        SolverKind::Ibp => (ibp_centroid(&data, &init, &o.ibp(), budget)?.centroid, None),
        SolverKind::Fulllp => (fulllp_centroid(&data, &init, &o.fulllp(), budget)?.centroid, None),
    };

    let mut out = create(a.output.as_deref())?;
    write_dataset(&mut out, std::slice::from_ref(&centroid.distribution))?;
    out.flush()?;
    if let (Some(path), Some(trace)) = (&a.residuals, residuals) {
        let mut w = create(Some(path))?;
        writeln!(w, "iteration,primal,dual")?;
        for (i, (p, d)) in trace.primal.iter().zip(&trace.dual).enumerate() {
            writeln!(w, "{},{p:.16e},{d:.16e}", i + 1)?;
        }
        w.flush()?;
    }
    // the centroid may be on stdout, so the objective goes to stderr then
    let line = format!("objective,{:.16e}", centroid.objective);
    if a.output.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

fn cluster_params(run: &RunOpts, solver: &SolverOpts) -> Res<ClusterParams> {
    Ok(ClusterParams {
        k: run.k,
        m: solver.m,
        solver: solver.centroid_solver()?,
        prune: !run.no_prune,
        seeding: match run.seeding {
            SeedingArg::D2 => Seeding::Distance,
            SeedingArg::Uniform => Seeding::Uniform,
        },
        seed: run.seed,
        // the pool is already sized by the caller
        workers: 0,
        ..Default::default()
    })
}

fn cluster(a: &ClusterArgs) -> Res<()> {
    let params = ClusterParams { max_outer: a.max_outer, ..cluster_params(&a.run, &a.solver)? };
    let reg = registry(&a.tables)?;
    let data = load(&a.input, &reg)?;
    let model = d2_cluster(&data, &params)?;

    let mut out = create(a.labels.as_deref())?;
    write_labels(&mut out, &model.labels)?;
    out.flush()?;
    if let Some(p) = &a.centroids {
        let cs: Vec<DiscreteDistribution> = model.centroids.iter().map(|c| c.distribution.clone()).collect();
        let mut w = create(Some(p))?;
        write_dataset(&mut w, &cs)?;
        w.flush()?;
    }
    if let Some(p) = &a.trace {
        let mut w = create(Some(p))?;
        write_trace_csv(&mut w, &model.objective_trace)?;
        w.flush()?;
    }
    Ok(())
}

fn profile(a: &ProfileArgs) -> Res<()> {
    if !(a.t_total.is_finite() && a.t_total > 0.0) {
        return Err(Failure::usage("--t-total must be a positive number of seconds"));
    }
    let params = cluster_params(&a.run, &a.solver)?;
    let reg = registry(&a.tables)?;
    let data = load(&a.input, &reg)?;
    let (_, log) = profile_run(&data, &params, a.eta, Duration::from_secs_f64(a.t_total))?;
    let mut out = create(a.output.as_deref())?;
    write_profile_csv(&mut out, &log)?;
    out.flush()?;
    Ok(())
}

fn generate(a: &GenArgs) -> Res<()> {
    let d = SynthSpec::default();
    let spec = SynthSpec {
        n: a.n,
        d: a.d,
        m: a.m,
        clusters: a.clusters,
        separation: a.sep,
        noise: a.noise,
        dirichlet_alpha: a.alpha.unwrap_or(d.dirichlet_alpha),
        t_dof: a.dof.unwrap_or(d.t_dof),
        seed: a.seed,
    };
    let synth = generate_synthetic(&spec)?;
    let mut out = create(a.output.as_deref())?;
    write_dataset(&mut out, &synth.data)?;
    out.flush()?;
    if let Some(p) = &a.labels {
        let mut w = create(Some(p))?;
        write_labels(&mut w, &synth.labels)?;
        w.flush()?;
    }
    Ok(())
}

fn evaluate(a: &EvalArgs) -> Res<()> {
    let truth = load_labels(&a.truth)?;
    let pred = load_labels(&a.pred)?;
    let table = ContingencyTable::from_labels(&truth, &pred)?;
    let mut out = std::io::stdout().lock();
    if matches!(a.metric, Metric::Ami | Metric::All) {
        writeln!(out, "ami,{}", ami(&table)?)?;
    }
    if matches!(a.metric, Metric::Ari | Metric::All) {
        writeln!(out, "ari,{}", ari(&table)?)?;
    }
    if matches!(a.metric, Metric::Hc | Metric::All) {
        let (h, c) = homogeneity_completeness(&table)?;
        writeln!(out, "homogeneity,{h}")?;
        writeln!(out, "completeness,{c}")?;
    }
    Ok(())
}
