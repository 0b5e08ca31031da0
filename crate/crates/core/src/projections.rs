//! Projection operators: the affine subspace `{z : Az = b}`, the box
//! `⨉[cᵢ, dᵢ]`, and single slab / half-space rows `c ≤ a·x ≤ d`.

use crate::error::{Error, Result};
use crate::linalg::{check_len, norm_inf, qr_factor_rows, DenseMatrix, QrFactors};
use crate::Real;

/// Euclidean projector onto `{z : Az = b}` for a full-row-rank `A` with
/// `M ≤ N`, using the thin QR factorization of `Aᵀ`.
#[derive(Debug, Clone)]
pub struct AffineProjector<T> {
    a: DenseMatrix<T>,
    b: Vec<T>,
    factors: QrFactors<T>,
}

impl<T: Real> AffineProjector<T> {
    pub fn new(a: DenseMatrix<T>, b: Vec<T>) -> Result<Self> {
        check_len("affine right-hand side", a.rows(), b.len())?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("affine right-hand side"));
        }
        let factors = qr_factor_rows(&a)?;
        Ok(Self { a, b, factors })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.a
    }

    pub fn rhs(&self) -> &[T] {
        &self.b
    }

    pub fn factors(&self) -> &QrFactors<T> {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// `Ax − b`
    pub fn residual(&self, x: &[T]) -> Result<Vec<T>> {
        let mut r = self.a.matvec(x)?;
        for (ri, &bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        Ok(r)
    }

    /// `P₁x − x = −Q (Rᵀ)⁻¹ (Ax − b)`
    pub fn displacement(&self, x: &[T]) -> Result<Vec<T>> {
        let r = self.residual(x)?;
        let y = self.factors.solve_r_t(&r)?;
        let mut d = self.factors.q_mul(&y)?;
        d.iter_mut().for_each(|v| *v = -*v);
        Ok(d)
    }

    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        let mut p = self.displacement(x)?;
        for (pi, &xi) in p.iter_mut().zip(x) {
            *pi += xi;
        }
        Ok(p)
    }

    /// Scale used for membership tests: `1 + ‖b‖∞`.
    pub fn residual_scale(&self) -> T {
        T::one() + norm_inf(&self.b)
    }
}

/// Free-function form of [`AffineProjector::project`].
pub fn project_affine<T: Real>(p: &AffineProjector<T>, x: &[T]) -> Result<Vec<T>> {
    p.project(x)
}

/// Componentwise clipping onto `⨉[lowerᵢ, upperᵢ]`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxProjector<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> BoxProjector<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        check_len("box bounds", lower.len(), upper.len())?;
        for (i, (&c, &d)) in lower.iter().zip(&upper).enumerate() {
            if c.is_nan() || d.is_nan() || c > d || c == T::infinity() || d == T::neg_infinity() {
                return Err(Error::InvalidParameter(format!(
                    "box component {i}: bounds [{c}, {d}] are not ordered"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(n: usize, lower: T, upper: T) -> Result<Self> {
        Self::new(vec![lower; n], vec![upper; n])
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("box projection input", self.dim(), x.len())?;
        Ok(x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&xi, (&c, &d))| xi.max(c).min(d))
            .collect())
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&xi, (&c, &d))| c <= xi && xi <= d)
    }
}

pub fn project_box<T: Real>(p: &BoxProjector<T>, x: &[T]) -> Result<Vec<T>> {
    p.project(x)
}

/// One interval row `lower ≤ a·x ≤ upper`, stored sparsely with its squared
/// norm cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabConstraint<T> {
    indices: Vec<usize>,
    values: Vec<T>,
    lower: T,
    upper: T,
    norm_sq: T,
}

impl<T: Real> SlabConstraint<T> {
    /// `indices` must be strictly increasing. Zero coefficients are dropped.
    pub fn new(indices: Vec<usize>, values: Vec<T>, lower: T, upper: T) -> Result<Self> {
        check_len("slab row", indices.len(), values.len())?;
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("slab row indices must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("slab row"));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::InvalidParameter(format!("slab bounds [{lower}, {upper}] are not ordered")));
        }
        if lower == T::neg_infinity() && upper == T::infinity() {
            return Err(Error::InvalidParameter("slab needs at least one finite bound".into()));
        }
        let (indices, values): (Vec<_>, Vec<_>) =
            indices.into_iter().zip(values).filter(|(_, v)| *v != T::zero()).unzip();
        let norm_sq: T = values.iter().map(|&v| v * v).sum();
        if norm_sq == T::zero() {
            return Err(Error::ZeroRowNorm { row: 0 });
        }
        Ok(Self { indices, values, lower, upper, norm_sq })
    }

    pub fn from_dense(row: &[T], lower: T, upper: T) -> Result<Self> {
        Self::new((0..row.len()).collect(), row.to_vec(), lower, upper)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    pub fn norm_sq(&self) -> T {
        self.norm_sq
    }

    pub fn is_finite_slab(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    /// Largest column index referenced, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    #[inline]
    pub fn dot(&self, x: &[T]) -> T {
        self.indices
            .iter()
            .zip(&self.values)
            .fold(T::zero(), |acc, (&j, &v)| acc + v * x[j])
    }

    #[inline]
    fn shift(&self, x: &mut [T], alpha: T) {
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            x[j] += alpha * v;
        }
    }

    /// Zero when `lower ≤ a·x ≤ upper`; otherwise `a·x` minus the violated bound.
    pub fn residual(&self, x: &[T]) -> T {
        let ax = self.dot(x);
        if ax > self.upper {
            ax - self.upper
        } else if ax < self.lower {
            ax - self.lower
        } else {
            T::zero()
        }
    }

    /// Satisfied up to `tol · (1 + |violated bound|)`.
    pub fn is_satisfied(&self, x: &[T], tol: T) -> bool {
        let ax = self.dot(x);
        ax <= self.upper + tol * (T::one() + self.upper.abs())
            && ax >= self.lower - tol * (T::one() + self.lower.abs())
    }

    /// One ART3 step in place; returns whether `x` moved.
    ///
    /// Finite slab with midpoint `m` and half-width `δ`, `u = a·x − m`:
    /// no move for `|u| ≤ δ`, reflection across the violated bounding
    /// hyperplane for `δ < |u| ≤ 3δ`, projection onto `a·x = m` beyond.
    /// A one-sided row gets a relaxed projection onto its hyperplane when
    /// violated.
    pub fn art3_step_in_place(&self, x: &mut [T], relax: T) -> bool {
        let ax = self.dot(x);
        if self.is_finite_slab() {
            let two = T::cst(2.0);
            let mid = (self.lower + self.upper) / two;
            let half = (self.upper - self.lower) / two;
            let u = ax - mid;
            if half > T::zero() && u.abs() <= half {
                return false;
            }
            if half > T::zero() && u.abs() <= T::cst(3.0) * half {
                let bound = if u > T::zero() { self.upper } else { self.lower };
                self.shift(x, -two * (ax - bound) / self.norm_sq);
            } else {
                if u == T::zero() {
                    return false;
                }
                self.shift(x, -u / self.norm_sq);
            }
            true
        } else {
            let violation = if ax > self.upper {
                ax - self.upper
            } else if ax < self.lower {
                ax - self.lower
            } else {
                return false;
            };
            self.shift(x, -relax * violation / self.norm_sq);
            true
        }
    }
}

/// Signed violation of a slab (see [`SlabConstraint::residual`]).
pub fn slab_residual<T: Real>(s: &SlabConstraint<T>, x: &[T]) -> T {
    s.residual(x)
}

/// ART3 step returning the new point (see [`SlabConstraint::art3_step_in_place`]).
pub fn art3_step<T: Real>(s: &SlabConstraint<T>, x: &[T], relax: T) -> Vec<T> {
    let mut y = x.to_vec();
    s.art3_step_in_place(&mut y, relax);
    y
}
