//! Linear programming by bisection on an objective bound: each probe asks
//! ART3+ for a point of `c ≤ Ax ≤ d, aᵀx ≤ bound`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{check_len, dot};
use crate::projections::{BoxProjector, SlabConstraint};
use crate::rowaction::{art3plus_solve, Art3Status, IntervalSystem};
use crate::Real;

/// Upper bound on bisection probes; the bracket reaches any sane tolerance first.
const MAX_PROBES: usize = 200;

/// Minimize `objective·x` subject to `system` and optional variable bounds.
#[derive(Debug, Clone)]
pub struct LpProblem<T> {
    pub objective: Vec<T>,
    pub system: IntervalSystem<T>,
    pub bounds: Option<BoxProjector<T>>,
    /// Known `(lo, hi)` bracket on the optimal value.
    pub bracket: Option<(T, T)>,
    /// Bisection stops when `hi − lo ≤ tol · (1 + |hi|)`.
    pub tol: T,
}

impl<T: Real> LpProblem<T> {
    pub fn new(objective: Vec<T>, system: IntervalSystem<T>, bounds: Option<BoxProjector<T>>) -> Result<Self> {
        check_len("LP objective", system.dim(), objective.len())?;
        if objective.iter().all(|&v| v == T::zero()) {
            return Err(Error::InvalidParameter("objective must be nonzero".into()));
        }
        if let Some(b) = &bounds {
            check_len("LP variable bounds", system.dim(), b.dim())?;
        }
        Ok(Self { objective, system, bounds, bracket: None, tol: T::cst(1e-6) })
    }

    pub fn with_bracket(mut self, lo: T, hi: T) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!("bracket [{lo}, {hi}] is not ordered")));
        }
        self.bracket = Some((lo, hi));
        Ok(self)
    }

    pub fn value(&self, x: &[T]) -> T {
        dot(&self.objective, x)
    }

    /// Constraint rows with the variable bounds folded in.
    pub fn feasibility_system(&self) -> Result<IntervalSystem<T>> {
        let mut sys = self.system.clone();
        if let Some(b) = &self.bounds {
            sys.fold_box(b)?;
        }
        Ok(sys)
    }

    /// `Σᵢ min(aᵢcᵢ, aᵢdᵢ)` over the variable bounds, if finite.
    pub fn bound_floor(&self) -> Option<T> {
        let b = self.bounds.as_ref()?;
        let mut total = T::zero();
        for ((&a, &c), &d) in self.objective.iter().zip(b.lower()).zip(b.upper()) {
            if a == T::zero() {
                continue;
            }
            let v = (a * c).min(a * d);
            if !v.is_finite() {
                return None;
            }
            total += v;
        }
        Some(total)
    }
}

/// The feasibility system plus the row `objective·x ≤ bound`. An infinite
/// bound returns the unaugmented system.
pub fn augment<T: Real>(problem: &LpProblem<T>, objective_bound: T) -> Result<IntervalSystem<T>> {
    let mut sys = problem.feasibility_system()?;
    if objective_bound < T::infinity() {
        let row = SlabConstraint::new((0..problem.objective.len()).collect(), problem.objective.clone(), T::neg_infinity(), objective_bound)?;
        sys.push(row)?;
    }
    Ok(sys)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord<T> {
    /// Objective bound tried; `+∞` for the initial feasibility solve.
    pub bound: T,
    pub status: Art3Status,
    /// Objective value of the point found, when feasible.
    pub value: Option<T>,
    pub sweeps: usize,
    /// Bracket after this probe.
    pub lo: T,
    pub hi: T,
}

#[derive(Debug, Clone)]
pub struct LpOutcome<T> {
    pub x_best: Vec<T>,
    pub value_best: T,
    pub probes: Vec<ProbeRecord<T>>,
}

impl<T: Real> LpOutcome<T> {
    /// CSV with header `probe,bound,status,value,sweeps`.
    pub fn write_csv(&self, w: &mut impl Write, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "probe,bound,status,value,sweeps")?;
        for (k, p) in self.probes.iter().enumerate() {
            let status = match p.status {
                Art3Status::Feasible => "feasible",
                Art3Status::SweepLimit => "sweep-limit",
            };
            let value = p.value.map(|v| v.as_f64().to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{},{}", k, p.bound.as_f64(), status, value, p.sweeps)?;
        }
        Ok(())
    }
}

/// ART3+O: bisection on the objective bound with ART3+ feasibility probes.
///
/// `hi` is the objective value of the best point found so far; `lo` comes
/// from the bracket or the variable bounds and is raised whenever a probe
/// hits its sweep cap. Each probe is warm-started from the incumbent.
pub fn art3plus_o<T: Real>(problem: &LpProblem<T>, lambda: T, sweep_cap: Option<usize>) -> Result<LpOutcome<T>> {
    let base = problem.feasibility_system()?;
    let cap = |sys: &IntervalSystem<T>| sweep_cap.unwrap_or_else(|| sys.default_sweep_cap());

    let start = vec![T::zero(); base.dim()];
    let first = art3plus_solve(&base, start, lambda, cap(&base))?;
    if first.status != Art3Status::Feasible {
        return Err(Error::NoFeasibleStart { sweeps: first.sweeps });
    }
    let mut x_best = first.x;
    let mut hi = problem.value(&x_best);
    let mut lo = match (problem.bracket, problem.bound_floor()) {
        (Some((lo, _)), _) => lo,
        (None, Some(f)) => f,
        (None, None) => return Err(Error::BracketRequired),
    };
    lo = lo.min(hi);

    let mut probes = vec![ProbeRecord {
        bound: T::infinity(),
        status: Art3Status::Feasible,
        value: Some(hi),
        sweeps: first.sweeps,
        lo,
        hi,
    }];

    let two = T::cst(2.0);
    while hi - lo > problem.tol * (T::one() + hi.abs()) && probes.len() < MAX_PROBES {
        let mid = (lo + hi) / two;
        let sys = augment(problem, mid)?;
        let out = art3plus_solve(&sys, x_best.clone(), lambda, cap(&sys))?;
        let value = match out.status {
            Art3Status::Feasible => {
                let v = problem.value(&out.x);
                if v < hi {
                    hi = v;
                    x_best = out.x;
                }
                lo = lo.min(hi);
                Some(v)
            }
            Art3Status::SweepLimit => {
                lo = mid;
                None
            }
        };
        probes.push(ProbeRecord { bound: mid, status: out.status, value, sweeps: out.sweeps, lo, hi });
    }

    Ok(LpOutcome { value_best: problem.value(&x_best), x_best, probes })
}
