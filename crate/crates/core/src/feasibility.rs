//! Two-set feasibility `Ax = b, x ∈ ⨉[cᵢ, dᵢ]`: alternating and parallel
//! projections, with and without extrapolation, plus the decibel proximity
//! trace used to compare them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{check_len, distance, norm_inf};
use crate::projections::{AffineProjector, BoxProjector};
use crate::Real;

/// Proximity value reported once the numerator vanishes.
pub const DB_FLOOR: f64 = -400.0;

/// Below this squared step length the EAPM extrapolation falls back to 1.
const EAPM_DENOM_GUARD: f64 = 1e-28;

/// Intersection of the affine set `S₁ = {Ax = b}` and the box `S₂`.
#[derive(Debug, Clone)]
pub struct TwoSetProblem<T> {
    pub affine: AffineProjector<T>,
    pub boxp: BoxProjector<T>,
    /// A point of `S₁ ∩ S₂` when the generator knows one.
    pub known_feasible: Option<Vec<T>>,
}

impl<T: Real> TwoSetProblem<T> {
    pub fn new(affine: AffineProjector<T>, boxp: BoxProjector<T>, known_feasible: Option<Vec<T>>) -> Result<Self> {
        check_len("box dimension", affine.dim(), boxp.dim())?;
        let problem = Self { affine, boxp, known_feasible: None };
        if let Some(z) = &known_feasible {
            check_len("known feasible point", problem.dim(), z.len())?;
            let tol = T::rel_tol(1e-8);
            let res = problem.affine_residual(z)?;
            let inside = z
                .iter()
                .zip(problem.boxp.lower().iter().zip(problem.boxp.upper()))
                .all(|(&v, (&c, &d))| v >= c - tol && v <= d + tol);
            if res > tol * problem.affine.residual_scale() || !inside {
                return Err(Error::InvalidParameter("known feasible point violates the constraints".into()));
            }
        }
        Ok(Self { known_feasible, ..problem })
    }

    pub fn dim(&self) -> usize {
        self.affine.dim()
    }

    /// `‖Ax − b‖∞`
    pub fn affine_residual(&self, x: &[T]) -> Result<T> {
        Ok(norm_inf(&self.affine.residual(x)?))
    }

    pub fn in_affine(&self, x: &[T], tol: T) -> Result<bool> {
        Ok(self.affine_residual(x)? <= tol * self.affine.residual_scale())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Pocs,
    Ppm,
    Eapm,
    Eppm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pocs, Method::Ppm, Method::Eapm, Method::Eppm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pocs => "POCS",
            Method::Ppm => "PPM",
            Method::Eapm => "EAPM",
            Method::Eppm => "EPPM",
        }
    }

    pub fn is_extrapolated(self) -> bool {
        matches!(self, Method::Eapm | Method::Eppm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig<T> {
    pub method: Method,
    /// EAPM relaxation, `0 < ρ < 2`.
    pub relax_rho: T,
    /// EPPM relaxation, `0 < χ < 2`.
    pub relax_chi: T,
    /// Constant relaxation for POCS and PPM.
    pub fixed_lambda: T,
    pub max_iters: usize,
    pub stop_db: T,
    /// Relative residual under which a point counts as lying in `S₁`.
    pub membership_tol: T,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            relax_rho: T::cst(1.9),
            relax_chi: T::cst(1.9),
            fixed_lambda: T::one(),
            max_iters: 500,
            stop_db: T::cst(-300.0),
            membership_tol: T::cst(1e-10),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let two = T::cst(2.0);
        let open = |v: T| v > T::zero() && v < two;
        if !open(self.relax_rho) {
            return Err(Error::InvalidParameter(format!("rho must lie in (0, 2), got {}", self.relax_rho)));
        }
        if !open(self.relax_chi) {
            return Err(Error::InvalidParameter(format!("chi must lie in (0, 2), got {}", self.relax_chi)));
        }
        if !(self.fixed_lambda > T::zero()) {
            return Err(Error::InvalidParameter("lambda must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry<T> {
    pub iter: usize,
    pub proximity_db: T,
    /// Extrapolation factor used to reach this iterate (1 when unextrapolated).
    pub factor: T,
    pub wall_s: f64,
    pub dist_feas: Option<T>,
    /// `‖Ax⁽ⁿ⁾ − b‖∞`
    pub affine_residual: T,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace<T> {
    pub entries: Vec<TraceEntry<T>>,
    /// Iterations where the EPPM displacements cancelled and `L = 1` was used.
    pub cancellations: Vec<usize>,
}

impl<T: Real> IterationTrace<T> {
    /// First iteration whose proximity is at or below `db`.
    pub fn iters_to(&self, db: f64) -> Option<usize> {
        self.entries.iter().find(|e| e.proximity_db.as_f64() <= db).map(|e| e.iter)
    }

    pub fn db_series(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.proximity_db.as_f64()).collect()
    }

    pub fn total_wall_s(&self) -> f64 {
        self.entries.iter().map(|e| e.wall_s).sum()
    }

    /// CSV with header `iter,proximity_db,factor,wall_s,dist_feas`; each
    /// comment line is prefixed with `# `. Without `timing`, `wall_s` is 0 so
    /// the output is reproducible.
    pub fn write_csv(&self, w: &mut impl Write, comments: &[String], timing: bool) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "iter,proximity_db,factor,wall_s,dist_feas")?;
        for e in &self.entries {
            let wall = if timing { e.wall_s } else { 0.0 };
            let dist = e.dist_feas.map(|d| d.as_f64().to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{},{}", e.iter, e.proximity_db.as_f64(), e.factor.as_f64(), wall, dist)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub x: Vec<T>,
    pub trace: IterationTrace<T>,
    pub status: SolveStatus,
}

/// Both projections of one point, computed once and shared by the step and
/// the proximity evaluation.
struct Probe<T> {
    p1: Vec<T>,
    p2: Vec<T>,
    in_s1: bool,
    in_s2: bool,
    residual: T,
}

fn probe<T: Real>(problem: &TwoSetProblem<T>, x: &[T], tol: T) -> Result<Probe<T>> {
    let r = problem.affine.residual(x)?;
    let residual = norm_inf(&r);
    let y = problem.affine.factors().solve_r_t(&r)?;
    let q = problem.affine.factors().q_mul(&y)?;
    let p1 = x.iter().zip(&q).map(|(&xi, &qi)| xi - qi).collect();
    let p2 = problem.boxp.project(x)?;
    Ok(Probe {
        p1,
        in_s2: p2 == x,
        p2,
        in_s1: residual <= tol * problem.affine.residual_scale(),
        residual,
    })
}

fn dist_sq<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&u, &v)| acc + (u - v) * (u - v))
}

/// `‖P₁x − x‖² + ‖P₂x − x‖²`, with the first term zero for points of `S₁`.
fn proximity_sq<T: Real>(p: &Probe<T>, x: &[T]) -> T {
    let s1 = if p.in_s1 { T::zero() } else { dist_sq(&p.p1, x) };
    s1 + dist_sq(&p.p2, x)
}

fn to_db<T: Real>(num: T, denom: T) -> T {
    let floor = T::cst(DB_FLOOR);
    if num == T::zero() {
        floor
    } else {
        (T::cst(10.0) * (num / denom).log10()).max(floor)
    }
}

/// Normalized proximity of `x` relative to `x0`, in decibels.
pub fn proximity_db<T: Real>(problem: &TwoSetProblem<T>, x: &[T], x0: &[T], membership_tol: T) -> Result<T> {
    let denom = proximity_sq(&probe(problem, x0, membership_tol)?, x0);
    if denom == T::zero() {
        return Err(Error::ZeroDenominator);
    }
    let num = proximity_sq(&probe(problem, x, membership_tol)?, x);
    Ok(to_db(num, denom))
}

fn lerp<T: Real>(x: &[T], lambda: T, target: &[T]) -> Vec<T> {
    x.iter().zip(target).map(|(&xi, &ti)| xi + lambda * (ti - xi)).collect()
}

fn midpoint<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let half = T::cst(0.5);
    a.iter().zip(b).map(|(&u, &v)| half * (u + v)).collect()
}

fn pocs_from<T: Real>(problem: &TwoSetProblem<T>, x: &[T], p: &Probe<T>, lambda: T) -> Result<Vec<T>> {
    let y = problem.affine.project(&p.p2)?;
    Ok(lerp(x, lambda, &y))
}

fn ppm_from<T: Real>(x: &[T], p: &Probe<T>, lambda: T) -> Vec<T> {
    lerp(x, lambda, &midpoint(&p.p1, &p.p2))
}

fn eapm_from<T: Real>(problem: &TwoSetProblem<T>, x: &[T], p: &Probe<T>, rho: T, tol: T) -> Result<(Vec<T>, T)> {
    if !p.in_s1 {
        return Err(Error::NotInAffineSet {
            residual: p.residual.as_f64(),
            tolerance: (tol * problem.affine.residual_scale()).as_f64(),
        });
    }
    let y = problem.affine.project(&p.p2)?;
    let mut k = T::one();
    if !p.in_s2 {
        let denom = dist_sq(&y, x);
        if denom >= T::cst(EAPM_DENOM_GUARD) {
            k = dist_sq(&p.p2, x) / denom;
        }
    }
    Ok((lerp(x, rho * k, &y), k))
}

/// Result of one EPPM step.
#[derive(Debug, Clone)]
pub struct EppmStep<T> {
    pub x: Vec<T>,
    pub factor: T,
    /// The two displacements cancelled exactly; the plain midpoint step was taken.
    pub cancelled: bool,
}

fn eppm_from<T: Real>(x: &[T], p: &Probe<T>, chi: T) -> EppmStep<T> {
    if p.in_s1 && p.in_s2 {
        return EppmStep { x: x.to_vec(), factor: T::one(), cancelled: false };
    }
    let mid = midpoint(&p.p1, &p.p2);
    let num = dist_sq(&p.p1, x) + dist_sq(&p.p2, x);
    // ‖P₁x + P₂x − 2x‖² = 4‖mid − x‖²
    let denom = T::cst(4.0) * dist_sq(&mid, x);
    if denom == T::zero() {
        return EppmStep { x: lerp(x, chi, &mid), factor: T::one(), cancelled: true };
    }
    let l = T::cst(2.0) * num / denom;
    EppmStep { x: lerp(x, chi * l, &mid), factor: l, cancelled: false }
}

/// `x + λ(P₁P₂x − x)`
pub fn step_pocs<T: Real>(problem: &TwoSetProblem<T>, x: &[T], lambda: T) -> Result<Vec<T>> {
    let p2 = problem.boxp.project(x)?;
    let y = problem.affine.project(&p2)?;
    Ok(lerp(x, lambda, &y))
}

/// `x + λ((P₁x + P₂x)/2 − x)`
pub fn step_ppm<T: Real>(problem: &TwoSetProblem<T>, x: &[T], lambda: T) -> Result<Vec<T>> {
    let p1 = problem.affine.project(x)?;
    let p2 = problem.boxp.project(x)?;
    Ok(lerp(x, lambda, &midpoint(&p1, &p2)))
}

/// Extrapolated alternating step; `x` must lie in `S₁`. Returns the new
/// point and the extrapolation factor `K`.
pub fn step_eapm<T: Real>(problem: &TwoSetProblem<T>, x: &[T], rho: T, membership_tol: T) -> Result<(Vec<T>, T)> {
    let p = probe(problem, x, membership_tol)?;
    eapm_from(problem, x, &p, rho, membership_tol)
}

/// Extrapolated parallel step with factor `L`.
pub fn step_eppm<T: Real>(problem: &TwoSetProblem<T>, x: &[T], chi: T, membership_tol: T) -> Result<EppmStep<T>> {
    let p = probe(problem, x, membership_tol)?;
    Ok(eppm_from(x, &p, chi))
}

/// Runs the configured method from `x⁽⁰⁾ = P₁0`.
pub fn solve<T: Real>(problem: &TwoSetProblem<T>, config: &SolverConfig<T>) -> Result<Solution<T>> {
    let x0 = problem.affine.project(&vec![T::zero(); problem.dim()])?;
    solve_from(problem, config, x0)
}

pub fn solve_from<T: Real>(problem: &TwoSetProblem<T>, config: &SolverConfig<T>, x0: Vec<T>) -> Result<Solution<T>> {
    config.validate()?;
    check_len("starting point", problem.dim(), x0.len())?;
    let tol = config.membership_tol;
    let dist = |x: &[T]| problem.known_feasible.as_ref().map(|z| distance(x, z));

    let mut x = x0;
    let mut p = probe(problem, &x, tol)?;
    let denom = proximity_sq(&p, &x);
    let mut trace = IterationTrace {
        entries: vec![TraceEntry {
            iter: 0,
            proximity_db: T::zero(),
            factor: T::one(),
            wall_s: 0.0,
            dist_feas: dist(&x),
            affine_residual: p.residual,
        }],
        cancellations: Vec::new(),
    };
    if denom == T::zero() {
        return Ok(Solution { x, trace, status: SolveStatus::Converged });
    }

    for n in 1..=config.max_iters {
        let start = Instant::now();
        let (next, factor) = match config.method {
            Method::Pocs => (pocs_from(problem, &x, &p, config.fixed_lambda)?, T::one()),
            Method::Ppm => (ppm_from(&x, &p, config.fixed_lambda), T::one()),
            Method::Eapm => eapm_from(problem, &x, &p, config.relax_rho, tol)?,
            Method::Eppm => {
                let s = eppm_from(&x, &p, config.relax_chi);
                if s.cancelled {
                    trace.cancellations.push(n);
                }
                (s.x, s.factor)
            }
        };
        x = next;
        p = probe(problem, &x, tol)?;
        let wall_s = start.elapsed().as_secs_f64();

        let db = to_db(proximity_sq(&p, &x), denom);
        trace.entries.push(TraceEntry {
            iter: n,
            proximity_db: db,
            factor,
            wall_s,
            dist_feas: dist(&x),
            affine_residual: p.residual,
        });
        if db <= config.stop_db {
            return Ok(Solution { x, trace, status: SolveStatus::Converged });
        }
    }
    Ok(Solution { x, trace, status: SolveStatus::IterationLimit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    /// `S₁ = {z₁ + z₂ = 1}`, `S₂ = [0,1]²`.
    fn diagonal_problem(rhs: f64) -> TwoSetProblem<f64> {
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        TwoSetProblem::new(
            AffineProjector::new(a, vec![rhs]).unwrap(),
            BoxProjector::uniform(2, 0.0, 1.0).unwrap(),
            None,
        )
        .unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn pocs_hand_geometry() {
        let p = diagonal_problem(1.0);
        assert!(close(&step_pocs(&p, &[3.0, 4.0], 1.0).unwrap(), &[0.5, 0.5]));
        assert!(close(&step_pocs(&p, &[3.0, 4.0], 0.5).unwrap(), &[1.75, 2.25]));
        assert!(close(&step_pocs(&p, &[0.25, 0.75], 1.0).unwrap(), &[0.25, 0.75]));
    }

    #[test]
    fn ppm_hand_geometry() {
        let p = diagonal_problem(1.0);
        assert!(close(&step_ppm(&p, &[3.0, 4.0], 1.0).unwrap(), &[0.5, 1.0]));
        assert!(close(&step_ppm(&p, &[0.25, 0.75], 2.0).unwrap(), &[0.25, 0.75]));
    }

    #[test]
    fn eapm_factor_by_hand() {
        let p = diagonal_problem(0.0);
        let (x, k) = step_eapm(&p, &[2.0, -2.0], 1.0, 1e-10).unwrap();
        // ‖(−1, 2)‖² / ‖(−1.5, 1.5)‖²
        assert!((k - 5.0 / 4.5).abs() < 1e-14);
        assert!(close(&x, &[2.0 - 1.5 * k, -2.0 + 1.5 * k]));
    }

    #[test]
    fn eapm_inside_box_uses_unit_factor() {
        let p = diagonal_problem(1.0);
        let (x, k) = step_eapm(&p, &[0.25, 0.75], 1.9, 1e-10).unwrap();
        assert_eq!(k, 1.0);
        assert!(close(&x, &[0.25, 0.75]));
    }

    #[test]
    fn eapm_rejects_points_off_the_affine_set() {
        let p = diagonal_problem(1.0);
        assert!(matches!(step_eapm(&p, &[3.0, 4.0], 1.0, 1e-10), Err(Error::NotInAffineSet { .. })));
    }

    #[test]
    fn eppm_factor_cases() {
        let p = diagonal_problem(1.0);
        let s = step_eppm(&p, &[0.25, 0.75], 1.9, 1e-10).unwrap();
        assert_eq!(s.factor, 1.0);
        // in S₁ only: L = 2
        let s = step_eppm(&p, &[-1.0, 2.0], 1.0, 1e-10).unwrap();
        assert!((s.factor - 2.0).abs() < 1e-12);
        let s = step_eppm(&p, &[3.0, 4.0], 1.0, 1e-10).unwrap();
        assert!(s.factor >= 1.0 - 1e-12);
    }

    #[test]
    fn proximity_db_cases() {
        let p = diagonal_problem(1.0);
        let x0 = [3.0, 4.0];
        assert_eq!(proximity_db(&p, &x0, &x0, 1e-10).unwrap(), 0.0);
        assert_eq!(proximity_db(&p, &[0.5, 0.5], &x0, 1e-10).unwrap(), DB_FLOOR);
        assert!(matches!(proximity_db(&p, &x0, &[0.5, 0.5], 1e-10), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn proximity_db_tenth() {
        // S₁ = {z₁ = 0}, box [-10, 10]²: only the affine term is active.
        let a = DenseMatrix::new(1, 2, vec![1.0, 0.0]).unwrap();
        let p = TwoSetProblem::new(
            AffineProjector::new(a, vec![0.0]).unwrap(),
            BoxProjector::uniform(2, -10.0, 10.0).unwrap(),
            None,
        )
        .unwrap();
        let db = proximity_db(&p, &[0.1f64.sqrt(), 0.0], &[1.0, 0.0], 1e-10).unwrap();
        assert!((db + 10.0).abs() < 1e-12);
    }

    #[test]
    fn feasible_start_converges_immediately() {
        let a = DenseMatrix::new(1, 2, vec![1.0, -1.0]).unwrap();
        let p = TwoSetProblem::new(
            AffineProjector::new(a, vec![0.0]).unwrap(),
            BoxProjector::uniform(2, -1.0, 1.0).unwrap(),
            Some(vec![0.0, 0.0]),
        )
        .unwrap();
        for m in Method::ALL {
            let sol = solve(&p, &SolverConfig::new(m)).unwrap();
            assert_eq!(sol.status, SolveStatus::Converged);
            assert_eq!(sol.trace.entries.len(), 1);
            assert_eq!(sol.trace.entries[0].proximity_db, 0.0);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::<f64>::new(Method::Eapm);
        c.relax_rho = 2.0;
        assert!(c.validate().is_err());
        c.relax_rho = 1.0;
        c.max_iters = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().to_lowercase().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn csv_shape() {
        let p = diagonal_problem(1.0);
        let sol = solve(&p, &SolverConfig::new(Method::Pocs)).unwrap();
        let mut buf = Vec::new();
        sol.trace.write_csv(&mut buf, &["seed=0".into()], false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# seed=0"));
        assert_eq!(lines.next(), Some("iter,proximity_db,factor,wall_s,dist_feas"));
        assert_eq!(lines.count(), sol.trace.entries.len());
    }
}
