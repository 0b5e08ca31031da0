use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{axpy, check_len, dot, norm_sq, DenseMatrix};
use crate::Real;

/// Thin QR factors of an `n × m` matrix (`n ≥ m`): `input = Q R` with `Q`
/// having `m` orthonormal columns and `R` upper triangular.
///
/// `Q` is stored transposed (`m × n`, one basis vector per contiguous row)
/// since every product the projectors need walks its columns.
#[derive(Debug, Clone)]
pub struct QrFactors<T> {
    n: usize,
    m: usize,
    q_t: Vec<T>,
    r: Vec<T>,
}

/// Relative size of the smallest admissible `|r_kk|`.
const RANK_TOL: f64 = 1e-12;

/// Work below this many entries is not worth splitting across threads.
const PAR_THRESHOLD: usize = 1 << 16;

/// Householder QR of `a_transpose` (`n × m`, full column rank).
pub fn qr_factor<T: Real>(a_transpose: &DenseMatrix<T>) -> Result<QrFactors<T>> {
    let n = a_transpose.rows();
    let m = a_transpose.cols();
    let work = a_transpose.transpose().into_vec();
    householder(work, n, m)
}

/// QR of `aᵀ` given `a` itself (`m × n`, `m ≤ n`). The rows of a row-major
/// `a` are already the columns being reflected, so no transpose is formed.
pub fn qr_factor_rows<T: Real>(a: &DenseMatrix<T>) -> Result<QrFactors<T>> {
    householder(a.as_slice().to_vec(), a.cols(), a.rows())
}

fn householder<T: Real>(mut w: Vec<T>, n: usize, m: usize) -> Result<QrFactors<T>> {
    if m > n {
        return Err(Error::InvalidParameter(format!(
            "QR needs at least as many rows as columns, got {n}x{m}"
        )));
    }
    let two = T::cst(2.0);
    let mut tau = vec![T::zero(); m];
    let mut diag = vec![T::zero(); m];

    for k in 0..m {
        let (head, tail) = w.split_at_mut((k + 1) * n);
        let v = &mut head[k * n + k..];
        let norm_x = norm_sq(v).sqrt();
        if norm_x == T::zero() {
            continue;
        }
        let alpha = if v[0] >= T::zero() { -norm_x } else { norm_x };
        v[0] -= alpha;
        let t = two / norm_sq(v);
        tau[k] = t;
        diag[k] = alpha;

        let v: &[T] = v;
        let reflect = |cj: &mut [T]| {
            let s = t * dot(v, &cj[k..]);
            axpy(-s, v, &mut cj[k..]);
        };
        if tail.len() * (n - k) / n.max(1) > PAR_THRESHOLD {
            tail.par_chunks_mut(n).for_each(reflect);
        } else {
            tail.chunks_mut(n).for_each(reflect);
        }
    }

    let max_diag = diag.iter().fold(T::zero(), |acc, d| acc.max(d.abs()));
    let threshold = T::rel_tol(RANK_TOL) * max_diag;
    for (k, d) in diag.iter().enumerate() {
        if d.abs() <= threshold || *d == T::zero() {
            return Err(Error::RankDeficient {
                column: k,
                diagonal: d.abs().as_f64(),
                threshold: threshold.as_f64(),
            });
        }
    }

    let mut r = vec![T::zero(); m * m];
    for k in 0..m {
        r[k * m + k] = diag[k];
        for j in k + 1..m {
            r[k * m + j] = w[j * n + k];
        }
    }

    // Q e_k = H_0 ⋯ H_k e_k; reflectors past k leave e_k untouched.
    let mut q_t = vec![T::zero(); m * n];
    let accumulate = |(k, y): (usize, &mut [T])| {
        y[k] = T::one();
        for i in (0..=k).rev() {
            let v = &w[i * n + i..(i + 1) * n];
            let s = tau[i] * dot(v, &y[i..]);
            axpy(-s, v, &mut y[i..]);
        }
    };
    if m * n > PAR_THRESHOLD {
        q_t.par_chunks_mut(n.max(1)).enumerate().for_each(accumulate);
    } else {
        q_t.chunks_mut(n.max(1)).enumerate().for_each(accumulate);
    }

    Ok(QrFactors { n, m, q_t, r })
}

impl<T: Real> QrFactors<T> {
    /// Rows of the factored matrix (length of each basis vector).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of basis vectors.
    pub fn m(&self) -> usize {
        self.m
    }

    /// The `n × m` orthonormal factor.
    pub fn q_thin(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, self.m, |i, k| self.q_t[k * self.n + i])
    }

    /// Basis vector `k` (column `k` of the thin factor).
    pub fn q_column(&self, k: usize) -> &[T] {
        &self.q_t[k * self.n..(k + 1) * self.n]
    }

    /// The `m × m` upper-triangular factor.
    pub fn r_upper(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.m, self.m, |i, j| self.r[i * self.m + j])
    }

    /// `Q y` for `y` of length `m`.
    pub fn q_mul(&self, y: &[T]) -> Result<Vec<T>> {
        check_len("Q product input", self.m, y.len())?;
        let mut out = vec![T::zero(); self.n];
        for (k, &yk) in y.iter().enumerate() {
            axpy(yk, self.q_column(k), &mut out);
        }
        Ok(out)
    }

    /// `Qᵀ x` for `x` of length `n`.
    pub fn q_t_mul(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("Q-transpose product input", self.n, x.len())?;
        Ok((0..self.m).map(|k| dot(self.q_column(k), x)).collect())
    }

    /// Solves `Rᵀ y = rhs` by forward substitution.
    pub fn solve_r_t(&self, rhs: &[T]) -> Result<Vec<T>> {
        check_len("triangular solve rhs", self.m, rhs.len())?;
        let m = self.m;
        let mut y = rhs.to_vec();
        for i in 0..m {
            y[i] /= self.r[i * m + i];
            let yi = y[i];
            let row = &self.r[i * m + i + 1..(i + 1) * m];
            for (yj, &rij) in y[i + 1..].iter_mut().zip(row) {
                *yj -= rij * yi;
            }
        }
        Ok(y)
    }
}
