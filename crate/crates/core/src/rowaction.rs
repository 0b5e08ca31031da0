//! Row-action solvers: cyclic ART for the regularized least-squares problem
//! `σ²‖b − Ax‖² + ‖x‖²`, and ART3+ for interval systems `c ≤ Ax ≤ d`.

use crate::error::{Error, Result};
use crate::linalg::{check_len, norm_sq, spmv, SparseRowMatrix};
use crate::projections::{BoxProjector, SlabConstraint};
use crate::Real;

/// Tolerance for declaring an interval row satisfied, relative to `1 + |bound|`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct IntervalSystem<T> {
    rows: Vec<SlabConstraint<T>>,
    dim: usize,
}

impl<T: Real> IntervalSystem<T> {
    pub fn new(dim: usize, rows: Vec<SlabConstraint<T>>) -> Result<Self> {
        for s in &rows {
            if let Some(j) = s.max_index() {
                if j >= dim {
                    return Err(Error::DimensionMismatch { context: "slab column", expected: dim, found: j + 1 });
                }
            }
        }
        Ok(Self { rows, dim })
    }

    /// Rows `c ≤ Ax ≤ d`, followed by one slab `e_i` for every variable with
    /// a finite bound in `variable_box`.
    pub fn from_matrix(
        a: &SparseRowMatrix<T>,
        lower: &[T],
        upper: &[T],
        variable_box: Option<&BoxProjector<T>>,
    ) -> Result<Self> {
        check_len("interval lower bounds", a.rows(), lower.len())?;
        check_len("interval upper bounds", a.rows(), upper.len())?;
        let mut rows = Vec::with_capacity(a.rows());
        for (i, r) in a.iter_rows().enumerate() {
            let slab = SlabConstraint::new(r.indices.to_vec(), r.values.to_vec(), lower[i], upper[i])
                .map_err(|e| match e {
                    Error::ZeroRowNorm { .. } => Error::ZeroRowNorm { row: i },
                    other => other,
                })?;
            rows.push(slab);
        }
        let mut system = Self::new(a.cols(), rows)?;
        if let Some(b) = variable_box {
            system.fold_box(b)?;
        }
        Ok(system)
    }

    /// Appends the finite components of a box as unit-row slabs.
    pub fn fold_box(&mut self, b: &BoxProjector<T>) -> Result<()> {
        check_len("variable box", self.dim, b.dim())?;
        for (i, (&c, &d)) in b.lower().iter().zip(b.upper()).enumerate() {
            if c.is_finite() || d.is_finite() {
                self.rows.push(SlabConstraint::new(vec![i], vec![T::one()], c, d)?);
            }
        }
        Ok(())
    }

    pub fn push(&mut self, row: SlabConstraint<T>) -> Result<()> {
        if let Some(j) = row.max_index().filter(|&j| j >= self.dim) {
            return Err(Error::DimensionMismatch { context: "slab column", expected: self.dim, found: j + 1 });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[SlabConstraint<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Every row holds within [`FEASIBILITY_TOL`].
    pub fn is_feasible(&self, x: &[T]) -> bool {
        let tol = T::rel_tol(FEASIBILITY_TOL);
        self.rows.iter().all(|r| r.is_satisfied(x, tol))
    }

    pub fn max_violation(&self, x: &[T]) -> T {
        self.rows.iter().fold(T::zero(), |m, r| m.max(r.residual(x).abs()))
    }

    /// Sweep cap used when callers do not pick one: ten passes per row.
    pub fn default_sweep_cap(&self) -> usize {
        10 * self.rows.len().max(1)
    }
}

/// State of the regularized ART iteration on `[I σA][u; x] = σb`.
#[derive(Debug, Clone)]
pub struct ArtState<T> {
    pub x: Vec<T>,
    pub u: Vec<T>,
    pub n: usize,
    pub sigma: T,
    pub lambda: T,
}

impl<T: Real> ArtState<T> {
    pub fn new(rows: usize, cols: usize, sigma: T, lambda: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if !(lambda > T::zero() && lambda < T::cst(2.0)) {
            return Err(Error::InvalidParameter(format!("lambda must lie in (0, 2), got {lambda}")));
        }
        Ok(Self { x: vec![T::zero(); cols], u: vec![T::zero(); rows], n: 0, sigma, lambda })
    }

    /// Applies one step on row `n mod M` and returns `γₙ`.
    pub fn step(&mut self, a: &SparseRowMatrix<T>, b: &[T], row_norms_sq: &[T]) -> T {
        let j = self.n % a.rows();
        let row = a.row(j);
        let sigma = self.sigma;
        let gamma = self.lambda * (sigma * (b[j] - row.dot(&self.x)) - self.u[j])
            / (T::one() + sigma * sigma * row_norms_sq[j]);
        self.u[j] += gamma;
        row.axpy_into(sigma * gamma, &mut self.x);
        self.n += 1;
        gamma
    }
}

/// One regularized ART step (cyclic row choice).
pub fn art_step<T: Real>(state: &mut ArtState<T>, a: &SparseRowMatrix<T>, b: &[T]) -> Result<T> {
    check_len("ART data", a.rows(), b.len())?;
    check_len("ART state x", a.cols(), state.x.len())?;
    check_len("ART state u", a.rows(), state.u.len())?;
    let j = state.n % a.rows();
    let norm = a.row(j).norm_sq();
    let mut norms = vec![T::zero(); a.rows()];
    norms[j] = norm;
    Ok(state.step(a, b, &norms))
}

/// `σ²‖b − Ax‖² + ‖x‖²`
pub fn regularized_objective<T: Real>(a: &SparseRowMatrix<T>, b: &[T], x: &[T], sigma: T) -> Result<T> {
    let ax = spmv(a, x)?;
    let misfit = ax.iter().zip(b).fold(T::zero(), |acc, (&p, &q)| acc + (q - p) * (q - p));
    Ok(sigma * sigma * misfit + norm_sq(x))
}

#[derive(Debug, Clone)]
pub struct ArtRun<T> {
    pub x: Vec<T>,
    /// Objective at cycle 0 (the zero start) and after every cycle.
    pub objective: Vec<T>,
}

/// Runs `cycles` full passes of regularized ART.
pub fn art_solve<T: Real>(a: &SparseRowMatrix<T>, b: &[T], sigma: T, lambda: T, cycles: usize) -> Result<ArtRun<T>> {
    art_solve_with(a, b, sigma, lambda, cycles, |_, _| {})
}

/// Like [`art_solve`], calling `on_cycle(k, x)` after each cycle `k ≥ 1`.
pub fn art_solve_with<T: Real>(
    a: &SparseRowMatrix<T>,
    b: &[T],
    sigma: T,
    lambda: T,
    cycles: usize,
    mut on_cycle: impl FnMut(usize, &[T]),
) -> Result<ArtRun<T>> {
    check_len("ART data", a.rows(), b.len())?;
    if cycles == 0 {
        return Err(Error::InvalidParameter("cycles must be at least 1".into()));
    }
    let mut state = ArtState::new(a.rows(), a.cols(), sigma, lambda)?;
    let norms = a.row_norms_sq();
    let mut objective = Vec::with_capacity(cycles + 1);
    objective.push(regularized_objective(a, b, &state.x, sigma)?);
    for k in 1..=cycles {
        for _ in 0..a.rows() {
            state.step(a, b, &norms);
        }
        objective.push(regularized_objective(a, b, &state.x, sigma)?);
        on_cycle(k, &state.x);
    }
    Ok(ArtRun { x: state.x, objective })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Art3Status {
    Feasible,
    SweepLimit,
}

#[derive(Debug, Clone)]
pub struct Art3Outcome<T> {
    pub x: Vec<T>,
    pub status: Art3Status,
    pub sweeps: usize,
}

/// ART3+ with active-list control.
///
/// The active list starts with every row. Each sweep visits it in index
/// order: satisfied rows are dropped, violated rows get an ART3 step and
/// stay. When the list empties every row is rechecked; the run ends if all
/// hold, otherwise the list is refilled.
pub fn art3plus_solve<T: Real>(
    system: &IntervalSystem<T>,
    x0: Vec<T>,
    lambda: T,
    max_sweeps: usize,
) -> Result<Art3Outcome<T>> {
    check_len("ART3+ start", system.dim(), x0.len())?;
    if max_sweeps == 0 {
        return Err(Error::InvalidParameter("max_sweeps must be at least 1".into()));
    }
    if !(lambda > T::zero() && lambda < T::cst(2.0)) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 2), got {lambda}")));
    }
    let mut x = x0;
    if system.is_feasible(&x) {
        return Ok(Art3Outcome { x, status: Art3Status::Feasible, sweeps: 0 });
    }
    let tol = T::rel_tol(FEASIBILITY_TOL);
    let rows = system.rows();
    let mut active: Vec<usize> = (0..rows.len()).collect();
    for sweep in 1..=max_sweeps {
        active.retain(|&j| {
            let row = &rows[j];
            if row.is_satisfied(&x, tol) {
                false
            } else {
                row.art3_step_in_place(&mut x, lambda);
                true
            }
        });
        if active.is_empty() {
            if system.is_feasible(&x) {
                return Ok(Art3Outcome { x, status: Art3Status::Feasible, sweeps: sweep });
            }
            active.extend(0..rows.len());
        }
    }
    Ok(Art3Outcome { x, status: Art3Status::SweepLimit, sweeps: max_sweeps })
}
