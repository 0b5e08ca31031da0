//! Experiment specs and the drivers that turn them into CSV files.
//!
//! A spec is plain `key = value` text. Run `i` uses seed `seed + i`, so any
//! single run can be regenerated on its own.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feasibility::{solve, Method, SolveStatus, SolverConfig, TwoSetProblem};
use crate::generate::{gen_conditioned_2set, gen_interval_lp, gen_interval_system, gen_random_2set};
use crate::lp::{art3plus_o, LpOutcome};
use crate::rowaction::{art3plus_solve, Art3Status};
use crate::tomo::{build_system, mean_integral, reconstruct, Phantom, RayGeometry, Reconstruction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Feas2Set,
    Conditioned,
    IntervalFeas,
    Lp,
    Recon,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Feas2Set => "feas2set",
            ExperimentKind::Conditioned => "conditioned",
            ExperimentKind::IntervalFeas => "interval-feas",
            ExperimentKind::Lp => "lp",
            ExperimentKind::Recon => "recon",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Feas2Set, Self::Conditioned, Self::IntervalFeas, Self::Lp, Self::Recon]
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown experiment kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub m: usize,
    pub n: usize,
    pub runs: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub rho: f64,
    pub chi: f64,
    /// POCS/PPM relaxation, ART3+ relaxation, or ART relaxation by kind.
    pub lambda: f64,
    pub max_iters: usize,
    pub stop_db: f64,
    /// Condition numbers are spread evenly over `[cond_lo, cond_hi]` across runs.
    pub cond_lo: f64,
    pub cond_hi: f64,
    pub margin: f64,
    pub sweep_cap: Option<usize>,
    pub sigma: f64,
    pub side: usize,
    pub views: usize,
    pub detectors: usize,
    /// Noise standard deviation as a fraction of the mean exact integral.
    pub noise: f64,
    pub cycles: usize,
    /// Record measured wall times; off keeps every output reproducible.
    pub timing: bool,
    pub out: PathBuf,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        let (m, n, lambda) = match kind {
            ExperimentKind::Feas2Set | ExperimentKind::Conditioned => (600, 1000, 1.0),
            ExperimentKind::IntervalFeas => (50, 30, 1.5),
            ExperimentKind::Lp => (30, 20, 1.9),
            ExperimentKind::Recon => (5700, 4096, 0.05),
        };
        Self {
            kind,
            m,
            n,
            runs: if kind == ExperimentKind::Recon { 1 } else { 20 },
            seed: 1,
            methods: Method::ALL.to_vec(),
            rho: 1.9,
            chi: 1.9,
            lambda,
            max_iters: 500,
            stop_db: -300.0,
            cond_lo: 3e4,
            cond_hi: 3.5e4,
            margin: 0.1,
            sweep_cap: None,
            sigma: 5.0,
            side: 64,
            views: 60,
            detectors: 95,
            noise: 0.01,
            cycles: 60,
            timing: false,
            out: PathBuf::from("out"),
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. `kind` is required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(k, _)| k == "kind")
            .ok_or_else(|| Error::Config("missing key `kind`".into()))?
            .1
            .parse()?;
        let mut spec = Self::new(kind);
        for (k, v) in &pairs {
            spec.set(k, v)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Overrides one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<V: FromStr>(key: &str, value: &str) -> Result<V> {
            value.parse().map_err(|_| Error::Config(format!("bad value {value:?} for `{key}`")))
        }
        match key {
            "kind" => self.kind = value.parse()?,
            "size" => (self.m, self.n) = parse_size(value)?,
            "m" => self.m = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "runs" => self.runs = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(|s| s.parse().map_err(|_| Error::Config(format!("unknown method {s:?}"))))
                    .collect::<Result<_>>()?
            }
            "rho" => self.rho = num(key, value)?,
            "chi" => self.chi = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "max_iters" => self.max_iters = num(key, value)?,
            "stop_db" => self.stop_db = num(key, value)?,
            "cond" => {
                let c = num(key, value)?;
                (self.cond_lo, self.cond_hi) = (c, c);
            }
            "cond_lo" => self.cond_lo = num(key, value)?,
            "cond_hi" => self.cond_hi = num(key, value)?,
            "margin" => self.margin = num(key, value)?,
            "sweep_cap" => self.sweep_cap = Some(num(key, value)?),
            "sigma" => self.sigma = num(key, value)?,
            "side" => self.side = num(key, value)?,
            "views" => self.views = num(key, value)?,
            "detectors" => self.detectors = num(key, value)?,
            "noise" => self.noise = num(key, value)?,
            "cycles" => self.cycles = num(key, value)?,
            "timing" => self.timing = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.m == 0 || self.n == 0 {
            return bad(format!("size must be positive, got {}x{}", self.m, self.n));
        }
        if self.methods.is_empty() {
            return bad("method list is empty".into());
        }
        if !(self.cond_lo >= 1.0 && self.cond_lo <= self.cond_hi) {
            return bad(format!("condition range [{}, {}] is invalid", self.cond_lo, self.cond_hi));
        }
        if self.cycles == 0 || self.max_iters == 0 {
            return bad("cycles and max_iters must be at least 1".into());
        }
        if !(self.noise >= 0.0) {
            return bad("noise must be nonnegative".into());
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; parsing it gives back this spec.
    pub fn to_config(&self) -> String {
        let methods: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        let mut s = format!(
            "kind = {}\nsize = {}x{}\nruns = {}\nseed = {}\nmethods = {}\nrho = {}\nchi = {}\nlambda = {}\n\
             max_iters = {}\nstop_db = {}\ncond_lo = {}\ncond_hi = {}\nmargin = {}\nsigma = {}\nside = {}\n\
             views = {}\ndetectors = {}\nnoise = {}\ncycles = {}\ntiming = {}\nout = {}\n",
            self.kind,
            self.m,
            self.n,
            self.runs,
            self.seed,
            methods.join(","),
            self.rho,
            self.chi,
            self.lambda,
            self.max_iters,
            self.stop_db,
            self.cond_lo,
            self.cond_hi,
            self.margin,
            self.sigma,
            self.side,
            self.views,
            self.detectors,
            self.noise,
            self.cycles,
            self.timing,
            self.out.display(),
        );
        if let Some(cap) = self.sweep_cap {
            s.push_str(&format!("sweep_cap = {cap}\n"));
        }
        s
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }

    /// Condition target of run `run` for the conditioned ensemble.
    pub fn run_cond(&self, run: usize) -> f64 {
        if self.runs == 1 {
            self.cond_lo
        } else {
            self.cond_lo + (self.cond_hi - self.cond_lo) * run as f64 / (self.runs - 1) as f64
        }
    }

    fn header(&self, extra: &[String]) -> Vec<String> {
        let mut lines: Vec<String> = self.to_config().lines().map(str::to_string).collect();
        lines.extend_from_slice(extra);
        lines
    }
}

/// Parses `MxN`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (m, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Config(format!("size must look like MxN, got {s:?}")))?;
    let p = |v: &str| v.trim().parse().map_err(|_| Error::Config(format!("bad size {s:?}")));
    Ok((p(m)?, p(n)?))
}

/// One method's run on one two-set instance.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub db: Vec<f64>,
    pub factors: Vec<f64>,
    pub affine_residuals: Vec<f64>,
    /// `‖x⁽ⁿ⁾ − z‖` for the generator's hidden point.
    pub dist_feas: Vec<f64>,
    pub residual_scale: f64,
    pub status: SolveStatus,
    pub wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct TwoSetRun {
    pub seed: u64,
    pub cond: Option<f64>,
    pub methods: Vec<MethodRun>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    /// Mean over runs; a run that never gets there counts as `max_iters + 1`.
    pub iters_to_100db: f64,
    pub iters_to_floor: f64,
    pub mean_wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct IntervalRun {
    pub seed: u64,
    pub status: Art3Status,
    pub sweeps: usize,
    pub max_violation: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct LpRun {
    pub seed: u64,
    pub outcome: LpOutcome<f64>,
}

#[derive(Debug, Clone)]
pub enum ExperimentReport {
    TwoSet { runs: Vec<TwoSetRun>, mean_curves: Vec<(Method, Vec<f64>)>, summary: Vec<MethodSummary> },
    Interval(Vec<IntervalRun>),
    Lp(Vec<LpRun>),
    Recon(Box<Reconstruction<f64>>),
}

/// Runs the experiment and writes its CSV files under `spec.out`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    fs::create_dir_all(&spec.out)?;
    match spec.kind {
        ExperimentKind::Feas2Set | ExperimentKind::Conditioned => run_two_set(spec),
        ExperimentKind::IntervalFeas => run_interval(spec),
        ExperimentKind::Lp => run_lp(spec),
        ExperimentKind::Recon => run_recon(spec),
    }
}

fn create(path: PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn solver_config(spec: &ExperimentSpec, method: Method) -> SolverConfig<f64> {
    SolverConfig {
        relax_rho: spec.rho,
        relax_chi: spec.chi,
        fixed_lambda: spec.lambda,
        max_iters: spec.max_iters,
        stop_db: spec.stop_db,
        ..SolverConfig::new(method)
    }
}

fn two_set_problem(spec: &ExperimentSpec, run: usize) -> Result<(TwoSetProblem<f64>, Option<f64>)> {
    let seed = spec.run_seed(run);
    if spec.kind == ExperimentKind::Conditioned {
        let cond = spec.run_cond(run);
        Ok((gen_conditioned_2set(spec.m, spec.n, cond, seed)?, Some(cond)))
    } else {
        Ok((gen_random_2set(spec.m, spec.n, seed)?, None))
    }
}

fn run_one_two_set(spec: &ExperimentSpec, run: usize) -> Result<TwoSetRun> {
    let (problem, cond) = two_set_problem(spec, run)?;
    let seed = spec.run_seed(run);
    let mut methods = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let sol = solve(&problem, &solver_config(spec, method))?;
        let mut extra = vec![format!("run = {run}"), format!("run_seed = {seed}"), format!("method = {method}")];
        if let Some(c) = cond {
            extra.push(format!("cond_target = {c}"));
        }
        let mut w = create(spec.out.join(format!("run{run:03}_{method}.csv")))?;
        sol.trace.write_csv(&mut w, &spec.header(&extra), spec.timing)?;
        w.flush()?;
        let t = &sol.trace.entries;
        methods.push(MethodRun {
            method,
            db: sol.trace.db_series(),
            factors: t.iter().map(|e| e.factor).collect(),
            affine_residuals: t.iter().map(|e| e.affine_residual).collect(),
            dist_feas: t.iter().filter_map(|e| e.dist_feas).collect(),
            residual_scale: problem.affine.residual_scale(),
            status: sol.status,
            wall_s: sol.trace.total_wall_s(),
        });
    }
    Ok(TwoSetRun { seed, cond, methods })
}

/// Per-iteration mean of dB curves; shorter curves are padded with their
/// final value.
pub fn mean_curve(curves: &[&[f64]]) -> Vec<f64> {
    let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let sum: f64 = curves.iter().map(|c| c.get(i).or(c.last()).copied().unwrap_or(0.0)).sum();
            sum / curves.len() as f64
        })
        .collect()
}

fn first_at_or_below(db: &[f64], level: f64) -> Option<usize> {
    db.iter().position(|&v| v <= level)
}

fn run_two_set(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let runs: Vec<TwoSetRun> = (0..spec.runs)
        .into_par_iter()
        .map(|run| run_one_two_set(spec, run))
        .collect::<Result<_>>()?;

    let censored = (spec.max_iters + 1) as f64;
    let mut mean_curves = Vec::new();
    let mut summary = Vec::new();
    for (k, &method) in spec.methods.iter().enumerate() {
        let curves: Vec<&[f64]> = runs.iter().map(|r| r.methods[k].db.as_slice()).collect();
        mean_curves.push((method, mean_curve(&curves)));
        let mean = |level: f64| {
            curves.iter().map(|c| first_at_or_below(c, level).map_or(censored, |i| i as f64)).sum::<f64>()
                / runs.len() as f64
        };
        let wall = if spec.timing {
            runs.iter().map(|r| r.methods[k].wall_s).sum::<f64>() / runs.len() as f64
        } else {
            0.0
        };
        summary.push(MethodSummary {
            method,
            iters_to_100db: mean(-100.0),
            iters_to_floor: mean(spec.stop_db),
            mean_wall_s: wall,
        });
    }

    let header = spec.header(&[]);
    let mut w = create(spec.out.join("mean_curve.csv"))?;
    for c in &header {
        writeln!(w, "# {c}")?;
    }
    let names: Vec<String> = spec.methods.iter().map(|m| format!("mean_db_{m}")).collect();
    writeln!(w, "iter,{}", names.join(","))?;
    let len = mean_curves.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    for i in 0..len {
        let vals: Vec<String> = mean_curves
            .iter()
            .map(|(_, c)| c.get(i).or(c.last()).copied().unwrap_or(0.0).to_string())
            .collect();
        writeln!(w, "{i},{}", vals.join(","))?;
    }
    w.flush()?;

    let mut w = create(spec.out.join("summary.csv"))?;
    for c in &header {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "method,iters_to_-100dB,iters_to_floor,mean_wall_s")?;
    for s in &summary {
        writeln!(w, "{},{},{},{}", s.method, s.iters_to_100db, s.iters_to_floor, s.mean_wall_s)?;
    }
    w.flush()?;

    Ok(ExperimentReport::TwoSet { runs, mean_curves, summary })
}

fn run_interval(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let runs: Vec<IntervalRun> = (0..spec.runs)
        .into_par_iter()
        .map(|run| {
            let seed = spec.run_seed(run);
            let inst = gen_interval_system::<f64>(spec.m, spec.n, spec.margin, seed)?;
            let cap = spec.sweep_cap.unwrap_or_else(|| inst.system.default_sweep_cap());
            let out = art3plus_solve(&inst.system, vec![0.0; spec.n], spec.lambda, cap)?;
            Ok(IntervalRun {
                seed,
                status: out.status,
                sweeps: out.sweeps,
                max_violation: inst.system.max_violation(&out.x),
                feasible: inst.system.is_feasible(&out.x),
            })
        })
        .collect::<Result<_>>()?;
    let mut w = create(spec.out.join("interval_summary.csv"))?;
    for c in spec.header(&[]) {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "run,seed,status,sweeps,max_violation")?;
    for (i, r) in runs.iter().enumerate() {
        writeln!(w, "{i},{},{},{},{}", r.seed, status_name(r.status), r.sweeps, r.max_violation)?;
    }
    w.flush()?;
    Ok(ExperimentReport::Interval(runs))
}

fn status_name(s: Art3Status) -> &'static str {
    match s {
        Art3Status::Feasible => "feasible",
        Art3Status::SweepLimit => "sweep-limit",
    }
}

fn run_lp(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let runs: Vec<LpRun> = (0..spec.runs)
        .into_par_iter()
        .map(|run| {
            let seed = spec.run_seed(run);
            let (problem, _) = gen_interval_lp::<f64>(spec.m, spec.n, seed)?;
            let outcome = art3plus_o(&problem, spec.lambda, spec.sweep_cap)?;
            let mut w = create(spec.out.join(format!("run{run:03}_probes.csv")))?;
            outcome.write_csv(&mut w, &spec.header(&[format!("run = {run}"), format!("run_seed = {seed}")]))?;
            w.flush()?;
            Ok(LpRun { seed, outcome })
        })
        .collect::<Result<_>>()?;
    let mut w = create(spec.out.join("lp_summary.csv"))?;
    for c in spec.header(&[]) {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "run,seed,value,probes")?;
    for (i, r) in runs.iter().enumerate() {
        writeln!(w, "{i},{},{},{}", r.seed, r.outcome.value_best, r.outcome.probes.len())?;
    }
    w.flush()?;
    Ok(ExperimentReport::Lp(runs))
}

fn run_recon(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let phantom = Phantom::head();
    let geometry = RayGeometry::new(spec.views, spec.detectors)?;
    let noise_std = spec.noise * mean_integral(&phantom, &geometry, spec.side);
    let problem = build_system::<f64>(&phantom, &geometry, spec.side, noise_std, spec.seed)?
        .with_params(spec.sigma, spec.lambda);
    let rec = reconstruct(&problem, spec.cycles)?;
    let header = spec.header(&[format!("noise_std = {noise_std}"), format!("best_cycle = {}", rec.best_cycle)]);

    let mut w = create(spec.out.join("recon_metrics.csv"))?;
    rec.write_csv(&mut w, &header)?;
    w.flush()?;
    let images = [
        ("truth", &problem.truth),
        ("best", rec.best_image()),
        ("final", rec.images.last().expect("at least one cycle")),
    ];
    for (name, img) in images {
        let mut w = create(spec.out.join(format!("{name}.pgm")))?;
        img.write_pgm16(&mut w)?;
        w.flush()?;
        let mut w = create(spec.out.join(format!("{name}.csv")))?;
        img.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(ExperimentReport::Recon(Box::new(rec)))
}
