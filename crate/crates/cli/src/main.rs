use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use projfeas::experiment::{parse_size, run_experiment, ExperimentKind, ExperimentReport, ExperimentSpec};
use projfeas::feasibility::{solve, Method, SolveStatus, SolverConfig, TwoSetProblem};
use projfeas::generate::{gen_conditioned_2set, gen_interval_lp, gen_interval_system, gen_random_2set};
use projfeas::linalg::{read_matrix_market, read_vector, write_matrix_market, write_vector, MarketMatrix, SparseRowMatrix};
use projfeas::lp::{art3plus_o, LpProblem};
use projfeas::projections::{AffineProjector, BoxProjector};
use projfeas::rowaction::IntervalSystem;
use projfeas::Error;

const EXIT_UNSOLVED: u8 = 2;
const EXIT_BAD_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "projfeas", version, about = "Projection methods for linear feasibility problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded problem instance as Matrix Market files.
    Gen(GenArgs),
    /// Solve one two-set problem `Ax = b, c ≤ x ≤ d` and write its trace.
    Solve(SolveArgs),
    /// Run an experiment ensemble.
    Bench(BenchArgs),
    /// Minimize a linear objective over an interval system with ART3+O.
    Lp(LpArgs),
    /// Reconstruct the head phantom with regularized ART.
    Recon(ReconArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Feas2set,
    Conditioned,
    Interval,
    Lp,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "feas2set")]
    kind: GenKind,
    #[arg(long, default_value = "600x1000")]
    size: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3e4)]
    cond: f64,
    #[arg(long, default_value_t = 0.1)]
    margin: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Directory with A.mtx, b.mtx, lower.mtx, upper.mtx (as written by `gen`).
    #[arg(long, conflicts_with_all = ["size", "cond"])]
    input: Option<PathBuf>,
    /// Generate the problem instead of reading it.
    #[arg(long, default_value = "600x1000")]
    size: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Use the conditioned generator with this condition number.
    #[arg(long)]
    cond: Option<f64>,
    #[arg(long, default_value = "EAPM")]
    method: Method,
    #[arg(long, default_value_t = 1.9)]
    rho: f64,
    #[arg(long, default_value_t = 1.9)]
    chi: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long)]
    out: PathBuf,
    /// Record wall times in the trace.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Key = value experiment spec; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated method list.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Condition number, or a range `lo:hi` spread over the runs.
    #[arg(long)]
    cond: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct LpArgs {
    /// Directory with A.mtx, c.mtx, d.mtx, objective.mtx, lower.mtx, upper.mtx.
    #[arg(long, conflicts_with = "size")]
    input: Option<PathBuf>,
    #[arg(long, default_value = "30x20")]
    size: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.9)]
    lambda: f64,
    #[arg(long)]
    sweep_cap: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconArgs {
    #[arg(long, default_value_t = 64)]
    side: usize,
    #[arg(long, default_value_t = 60)]
    views: usize,
    #[arg(long, default_value_t = 95)]
    detectors: usize,
    /// Noise standard deviation as a fraction of the mean line integral.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 5.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    lambda: f64,
    #[arg(long, default_value_t = 60)]
    cycles: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

enum Outcome {
    Done,
    Unsolved(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_BAD_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Lp(a) => lp_cmd(a),
        Command::Recon(a) => recon(a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Unsolved(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_UNSOLVED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let unsolved = e.chain().any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::NoFeasibleStart { .. })));
            ExitCode::from(if unsolved { EXIT_UNSOLVED } else { EXIT_BAD_INPUT })
        }
    }
}

fn size(s: &str) -> Result<(usize, usize)> {
    Ok(parse_size(s)?)
}

fn rows_of(system: &IntervalSystem<f64>) -> Result<(SparseRowMatrix<f64>, Vec<f64>, Vec<f64>)> {
    let rows = system
        .rows()
        .iter()
        .map(|r| r.indices().iter().copied().zip(r.values().iter().copied()).collect())
        .collect();
    let a = SparseRowMatrix::from_row_lists(system.dim(), rows)?;
    let lower = system.rows().iter().map(|r| r.lower()).collect();
    let upper = system.rows().iter().map(|r| r.upper()).collect();
    Ok((a, lower, upper))
}

fn write_two_set(p: &TwoSetProblem<f64>, dir: &Path) -> Result<()> {
    write_matrix_market(&MarketMatrix::Dense(p.affine.matrix().clone()), dir.join("A.mtx"))?;
    write_vector(p.affine.rhs(), dir.join("b.mtx"))?;
    write_vector(p.boxp.lower(), dir.join("lower.mtx"))?;
    write_vector(p.boxp.upper(), dir.join("upper.mtx"))?;
    if let Some(z) = &p.known_feasible {
        write_vector(z, dir.join("x_feasible.mtx"))?;
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<Outcome> {
    let (m, n) = size(&a.size)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    match a.kind {
        GenKind::Feas2set => write_two_set(&gen_random_2set(m, n, a.seed)?, &a.out)?,
        GenKind::Conditioned => write_two_set(&gen_conditioned_2set(m, n, a.cond, a.seed)?, &a.out)?,
        GenKind::Interval => {
            let inst = gen_interval_system::<f64>(m, n, a.margin, a.seed)?;
            let (mat, c, d) = rows_of(&inst.system)?;
            write_matrix_market(&MarketMatrix::Sparse(mat), a.out.join("A.mtx"))?;
            write_vector(&c, a.out.join("c.mtx"))?;
            write_vector(&d, a.out.join("d.mtx"))?;
            write_vector(&inst.interior, a.out.join("z.mtx"))?;
        }
        GenKind::Lp => {
            let (lp, z) = gen_interval_lp::<f64>(m, n, a.seed)?;
            let (mat, c, d) = rows_of(&lp.system)?;
            write_matrix_market(&MarketMatrix::Sparse(mat), a.out.join("A.mtx"))?;
            write_vector(&c, a.out.join("c.mtx"))?;
            write_vector(&d, a.out.join("d.mtx"))?;
            write_vector(&lp.objective, a.out.join("objective.mtx"))?;
            let bounds = lp.bounds.as_ref().expect("generated LPs are boxed");
            write_vector(bounds.lower(), a.out.join("lower.mtx"))?;
            write_vector(bounds.upper(), a.out.join("upper.mtx"))?;
            write_vector(&z, a.out.join("z.mtx"))?;
        }
    }
    Ok(Outcome::Done)
}

fn read_vec(dir: &Path, name: &str) -> Result<Vec<f64>> {
    let path = dir.join(name);
    read_vector(&path).with_context(|| format!("reading {}", path.display()))
}

fn read_mat(dir: &Path) -> Result<MarketMatrix<f64>> {
    let path = dir.join("A.mtx");
    read_matrix_market(&path).with_context(|| format!("reading {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn solve_cmd(a: SolveArgs) -> Result<Outcome> {
    let (problem, provenance) = match &a.input {
        Some(dir) => {
            let mat = read_mat(dir)?.into_dense();
            let affine = AffineProjector::new(mat, read_vec(dir, "b.mtx")?)?;
            let boxp = BoxProjector::new(read_vec(dir, "lower.mtx")?, read_vec(dir, "upper.mtx")?)?;
            let z = read_vec(dir, "x_feasible.mtx").ok();
            (TwoSetProblem::new(affine, boxp, z)?, format!("input = {}", dir.display()))
        }
        None => {
            let (m, n) = size(&a.size)?;
            match a.cond {
                Some(c) => (gen_conditioned_2set(m, n, c, a.seed)?, format!("generated conditioned {m}x{n} cond {c} seed {}", a.seed)),
                None => (gen_random_2set(m, n, a.seed)?, format!("generated feas2set {m}x{n} seed {}", a.seed)),
            }
        }
    };
    let config = SolverConfig {
        relax_rho: a.rho,
        relax_chi: a.chi,
        fixed_lambda: a.lambda,
        max_iters: a.max_iters,
        ..SolverConfig::new(a.method)
    };
    let sol = solve(&problem, &config)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let comments = vec![
        provenance,
        format!("method = {}", a.method),
        format!("rho = {} chi = {} lambda = {} max_iters = {}", a.rho, a.chi, a.lambda, a.max_iters),
    ];
    let mut w = create(&a.out.join("trace.csv"))?;
    sol.trace.write_csv(&mut w, &comments, a.timing)?;
    w.flush()?;
    write_vector(&sol.x, a.out.join("x.mtx"))?;
    let last = sol.trace.entries.last().expect("trace has entry 0");
    println!("{} {:?} after {} iterations, proximity {} dB", a.method, sol.status, last.iter, last.proximity_db);
    Ok(match sol.status {
        SolveStatus::Converged => Outcome::Done,
        SolveStatus::IterationLimit => Outcome::Unsolved(format!("iteration limit {} reached", a.max_iters)),
    })
}

fn bench(a: BenchArgs) -> Result<Outcome> {
    let mut spec = match (&a.config, &a.kind) {
        (Some(path), _) => ExperimentSpec::from_file(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(kind)) => ExperimentSpec::new(kind.parse()?),
        (None, None) => ExperimentSpec::new(ExperimentKind::Feas2Set),
    };
    if let (Some(_), Some(kind)) = (&a.config, &a.kind) {
        spec.set("kind", kind)?;
    }
    let mut set = |k: &str, v: Option<String>| -> Result<()> {
        if let Some(v) = v {
            spec.set(k, &v)?;
        }
        Ok(())
    };
    set("size", a.size)?;
    set("runs", a.runs.map(|v| v.to_string()))?;
    set("seed", a.seed.map(|v| v.to_string()))?;
    set("methods", a.method)?;
    set("rho", a.rho.map(|v| v.to_string()))?;
    set("chi", a.chi.map(|v| v.to_string()))?;
    set("lambda", a.lambda.map(|v| v.to_string()))?;
    set("sigma", a.sigma.map(|v| v.to_string()))?;
    if let Some(c) = a.cond {
        match c.split_once(':') {
            Some((lo, hi)) => {
                spec.set("cond_lo", lo)?;
                spec.set("cond_hi", hi)?;
            }
            None => spec.set("cond", &c)?,
        }
    }
    if let Some(out) = a.out {
        spec.out = out;
    }
    if a.timing {
        spec.timing = true;
    }
    spec.validate()?;

    let report = run_experiment(&spec)?;
    match &report {
        ExperimentReport::TwoSet { summary, runs, .. } => {
            println!("method  iters_to_-100dB  iters_to_floor  mean_wall_s");
            for s in summary {
                println!("{:<7} {:>15.2} {:>15.2} {:>12.4}", s.method, s.iters_to_100db, s.iters_to_floor, s.mean_wall_s);
            }
            let limited = runs.iter().flat_map(|r| &r.methods).filter(|m| m.status != SolveStatus::Converged).count();
            if limited > 0 {
                println!("{limited} method runs stopped at the iteration limit");
            }
        }
        ExperimentReport::Interval(runs) => {
            let solved = runs.iter().filter(|r| r.feasible).count();
            println!("{solved}/{} systems solved", runs.len());
        }
        ExperimentReport::Lp(runs) => {
            for (i, r) in runs.iter().enumerate() {
                println!("run {i}: value {} after {} probes", r.outcome.value_best, r.outcome.probes.len());
            }
        }
        ExperimentReport::Recon(rec) => {
            println!("best cycle {} with r = {}", rec.best_cycle, rec.distance[rec.best_cycle]);
        }
    }
    println!("results in {}", spec.out.display());
    Ok(Outcome::Done)
}

fn lp_cmd(a: LpArgs) -> Result<Outcome> {
    let problem = match &a.input {
        Some(dir) => {
            let mat = read_mat(dir)?.into_sparse();
            let system = IntervalSystem::from_matrix(&mat, &read_vec(dir, "c.mtx")?, &read_vec(dir, "d.mtx")?, None)?;
            let bounds = match (read_vec(dir, "lower.mtx"), read_vec(dir, "upper.mtx")) {
                (Ok(l), Ok(u)) => Some(BoxProjector::new(l, u)?),
                _ => None,
            };
            LpProblem::new(read_vec(dir, "objective.mtx")?, system, bounds)?
        }
        None => {
            let (m, n) = size(&a.size)?;
            gen_interval_lp::<f64>(m, n, a.seed)?.0
        }
    };
    let out = art3plus_o(&problem, a.lambda, a.sweep_cap)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let comments = vec![format!("lambda = {} sweep_cap = {:?}", a.lambda, a.sweep_cap)];
    let mut w = create(&a.out.join("probes.csv"))?;
    out.write_csv(&mut w, &comments)?;
    w.flush()?;
    write_vector(&out.x_best, a.out.join("x.mtx"))?;
    println!("value {} after {} probes", out.value_best, out.probes.len());
    Ok(Outcome::Done)
}

fn recon(a: ReconArgs) -> Result<Outcome> {
    let mut spec = ExperimentSpec::new(ExperimentKind::Recon);
    spec.side = a.side;
    spec.views = a.views;
    spec.detectors = a.detectors;
    spec.noise = a.noise;
    spec.sigma = a.sigma;
    spec.lambda = a.lambda;
    spec.cycles = a.cycles;
    spec.seed = a.seed;
    spec.out = a.out;
    spec.m = a.views * a.detectors;
    spec.n = a.side * a.side;
    if let ExperimentReport::Recon(rec) = run_experiment(&spec)? {
        println!("best cycle {} with r = {}", rec.best_cycle, rec.distance[rec.best_cycle]);
    }
    println!("results in {}", spec.out.display());
    Ok(Outcome::Done)
}
