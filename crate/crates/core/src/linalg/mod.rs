//! Dense and sparse-row linear algebra: storage, products, Householder QR
//! and Matrix Market exchange.

mod dense;
mod market;
mod qr;
mod sparse;

pub use dense::DenseMatrix;
pub use market::{parse, read_matrix_market, read_vector, write_dense, write_matrix_market, write_sparse, write_vector, MarketMatrix};
pub use qr::{qr_factor, qr_factor_rows, QrFactors};
pub use sparse::{spmv, SparseRow, SparseRowMatrix};

use crate::Real;

#[inline]
pub fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

#[inline]
pub fn norm_sq<T: Real>(x: &[T]) -> T {
    dot(x, x)
}

#[inline]
pub fn norm<T: Real>(x: &[T]) -> T {
    norm_sq(x).sqrt()
}

pub fn norm_inf<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| a - b).collect()
}

pub fn distance<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
        .sqrt()
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> crate::Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(crate::Error::DimensionMismatch { context, expected, found })
    }
}
