//! Seeded problem generators. Every generator is a pure function of its
//! parameters and seed (ChaCha8 stream).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feasibility::TwoSetProblem;
use crate::linalg::{dot, qr_factor, DenseMatrix, SparseRowMatrix};
use crate::lp::LpProblem;
use crate::projections::{AffineProjector, BoxProjector, SlabConstraint};
use crate::rowaction::IntervalSystem;
use crate::Real;

const RANK_RETRIES: usize = 3;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

fn cast_matrix<T: Real>(m: &DenseMatrix<f64>) -> DenseMatrix<T> {
    DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| T::cst(m.get(i, j)))
}

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Generation(format!("need 1 ≤ M ≤ N, got {m}×{n}")));
    }
    Ok(())
}

fn assemble<T: Real>(a: DenseMatrix<f64>, x: Vec<f64>) -> Result<TwoSetProblem<T>> {
    let a = cast_matrix::<T>(&a);
    let x: Vec<T> = x.into_iter().map(T::cst).collect();
    let b = a.matvec(&x)?;
    let n = a.cols();
    let affine = AffineProjector::new(a, b)?;
    TwoSetProblem::new(affine, BoxProjector::uniform(n, T::zero(), T::one())?, Some(x))
}

fn retry<T: Real>(mut attempt: impl FnMut() -> Result<TwoSetProblem<T>>) -> Result<TwoSetProblem<T>> {
    let mut last = None;
    for _ in 0..RANK_RETRIES {
        match attempt() {
            Err(e @ Error::RankDeficient { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(Error::Generation(format!(
        "matrix rank deficient after {RANK_RETRIES} attempts: {}",
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// `A` uniform on `[−0.5, 0.5]^{M×N}`, hidden `x` uniform on `[0, 1]^N`,
/// `b = Ax`, box `[0, 1]^N`.
pub fn gen_random_2set<T: Real>(m: usize, n: usize, seed: u64) -> Result<TwoSetProblem<T>> {
    check_shape(m, n)?;
    let mut rng = rng(seed);
    retry(|| {
        let a = uniform_matrix(&mut rng, m, n, -0.5, 0.5);
        let x = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        assemble(a, x)
    })
}

/// Singular values `σ_k = cond^{−k/(M−1)}`, so `σ_max/σ_min = cond`.
pub fn geometric_spectrum(m: usize, cond: f64) -> Vec<f64> {
    if m == 1 {
        return vec![1.0];
    }
    (0..m).map(|k| cond.powf(-(k as f64) / (m - 1) as f64)).collect()
}

/// `A = U Σ Vᵀ` with orthonormal `U`, `V` taken from QR factors of uniform
/// random matrices and the geometric spectrum of [`geometric_spectrum`].
pub fn gen_conditioned_2set<T: Real>(m: usize, n: usize, cond: f64, seed: u64) -> Result<TwoSetProblem<T>> {
    check_shape(m, n)?;
    if !(cond >= 1.0 && cond.is_finite()) {
        return Err(Error::Generation(format!("condition target must be at least 1, got {cond}")));
    }
    let mut rng = rng(seed);
    let spectrum = geometric_spectrum(m, cond);
    retry(|| {
        let u = qr_factor(&uniform_matrix(&mut rng, m, m, -0.5, 0.5))?.q_thin();
        let v = qr_factor(&uniform_matrix(&mut rng, n, m, -0.5, 0.5))?.q_thin();
        let us = DenseMatrix::from_fn(m, m, |i, k| u.get(i, k) * spectrum[k]);
        let a = us.matmul(&v.transpose())?;
        let x = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        assemble(a, x)
    })
}

/// Interval system with a certified interior point `z`.
#[derive(Debug, Clone)]
pub struct IntervalInstance<T> {
    pub system: IntervalSystem<T>,
    /// Every row holds at `z` with slack at least `margin · ‖a_j‖`.
    pub interior: Vec<T>,
    pub margin: f64,
}

fn interval_rows(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    z: &[f64],
    margin: f64,
    spread: f64,
) -> Result<Vec<SlabConstraint<f64>>> {
    (0..m)
        .map(|_| {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
            let norm = dot(&row, &row).sqrt();
            let centre = dot(&row, z);
            let g = rng.random_range(0.0..spread) * norm;
            let h = rng.random_range(0.0..spread) * norm;
            SlabConstraint::from_dense(&row, centre - margin * norm - g, centre + margin * norm + h)
        })
        .collect()
}

fn cast_slab<T: Real>(s: &SlabConstraint<f64>) -> Result<SlabConstraint<T>> {
    SlabConstraint::new(
        s.indices().to_vec(),
        s.values().iter().map(|&v| T::cst(v)).collect(),
        T::cst(s.lower()),
        T::cst(s.upper()),
    )
}

/// Rows uniform on `[−0.5, 0.5]^N`, hidden `z` uniform on `[0, 1]^N`, bounds
/// `a_j·z ∓ (margin·‖a_j‖ + g_j)` with `g_j` uniform on `[0, ‖a_j‖]`.
pub fn gen_interval_system<T: Real>(m: usize, n: usize, margin: f64, seed: u64) -> Result<IntervalInstance<T>> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::Generation(format!("margin must be positive, got {margin}")));
    }
    if n == 0 {
        return Err(Error::Generation("dimension must be positive".into()));
    }
    let mut rng = rng(seed);
    let z: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let rows = interval_rows(&mut rng, m, n, &z, margin, 1.0)?;
    let rows = rows.iter().map(cast_slab).collect::<Result<Vec<_>>>()?;
    Ok(IntervalInstance {
        system: IntervalSystem::new(n, rows)?,
        interior: z.into_iter().map(T::cst).collect(),
        margin,
    })
}

/// Bounded LP: box `[0, 1]^N`, interval rows around a hidden `z ∈ [0.2, 0.8]^N`
/// with interior slack `0.05·‖a_j‖`, objective uniform on `[−1, 1]^N`.
pub fn gen_interval_lp<T: Real>(m: usize, n: usize, seed: u64) -> Result<(LpProblem<T>, Vec<T>)> {
    if n == 0 {
        return Err(Error::Generation("dimension must be positive".into()));
    }
    let mut rng = rng(seed);
    let z: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..0.8)).collect();
    let rows = interval_rows(&mut rng, m, n, &z, 0.05, 0.5)?;
    let rows = rows.iter().map(cast_slab).collect::<Result<Vec<_>>>()?;
    let objective: Vec<T> = (0..n).map(|_| T::cst(rng.random_range(-1.0..1.0))).collect();
    let problem = LpProblem::new(
        objective,
        IntervalSystem::new(n, rows)?,
        Some(BoxProjector::uniform(n, T::zero(), T::one())?),
    )?;
    Ok((problem, z.into_iter().map(T::cst).collect()))
}

/// Dense consistent system for regularized ART: `A` uniform on `[−0.5, 0.5]`,
/// `b = A x̂` with `x̂` uniform on `[0, 1]^N`.
pub fn gen_consistent_system<T: Real>(m: usize, n: usize, seed: u64) -> Result<(SparseRowMatrix<T>, Vec<T>)> {
    let mut rng = rng(seed);
    let a = uniform_matrix(&mut rng, m, n, -0.5, 0.5);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let b = a.matvec(&x)?;
    Ok((SparseRowMatrix::from_dense(&cast_matrix(&a)), b.into_iter().map(T::cst).collect()))
}
