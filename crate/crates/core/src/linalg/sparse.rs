use crate::error::{Error, Result};
use crate::linalg::{check_len, DenseMatrix};
use crate::Real;

/// Compressed sparse-row matrix. Column indices within a row are strictly
/// increasing and every stored value is finite and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRowMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

/// Borrowed view of one sparse row.
#[derive(Debug, Clone, Copy)]
pub struct SparseRow<'a, T> {
    pub indices: &'a [usize],
    pub values: &'a [T],
}

impl<T: Real> SparseRow<'_, T> {
    #[inline]
    pub fn dot(&self, x: &[T]) -> T {
        self.indices
            .iter()
            .zip(self.values)
            .fold(T::zero(), |acc, (&j, &v)| acc + v * x[j])
    }

    #[inline]
    pub fn axpy_into(&self, alpha: T, y: &mut [T]) {
        for (&j, &v) in self.indices.iter().zip(self.values) {
            y[j] += alpha * v;
        }
    }

    pub fn norm_sq(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

impl<T: Real> SparseRowMatrix<T> {
    /// Builds a matrix from per-row `(column, value)` lists. Each row is
    /// sorted; explicit zeros are dropped; duplicates, out-of-range columns
    /// and non-finite values are rejected.
    pub fn from_row_lists(cols: usize, rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if j >= cols {
                    return Err(Error::InvalidSparseRow {
                        row: i,
                        reason: format!("column {j} out of range for {cols} columns"),
                    });
                }
                if last == Some(j) {
                    return Err(Error::InvalidSparseRow {
                        row: i,
                        reason: format!("duplicate column {j}"),
                    });
                }
                if !v.is_finite() {
                    return Err(Error::NonFinite("sparse matrix"));
                }
                last = Some(j);
                if v != T::zero() {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { rows: row_ptr.len() - 1, cols, row_ptr, col_idx, values })
    }

    pub fn from_dense(m: &DenseMatrix<T>) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != T::zero() {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows: m.rows(), cols: m.cols(), row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ptr: vec![0; rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> SparseRow<'_, T> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        SparseRow { indices: &self.col_idx[r.clone()], values: &self.values[r] }
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = SparseRow<'_, T>> {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// Cached-friendly squared norms of every row.
    pub fn row_norms_sq(&self) -> Vec<T> {
        self.iter_rows().map(|r| r.norm_sq()).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let r = self.row(i);
            for (&j, &v) in r.indices.iter().zip(r.values) {
                d.set(i, j, v);
            }
        }
        d
    }

    /// `Aᵀ y`
    pub fn matvec_t(&self, y: &[T]) -> Result<Vec<T>> {
        check_len("sparse transposed product input", self.rows, y.len())?;
        let mut out = vec![T::zero(); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            self.row(i).axpy_into(yi, &mut out);
        }
        Ok(out)
    }
}

/// Sparse matrix-vector product `m x`.
pub fn spmv<T: Real>(m: &SparseRowMatrix<T>, x: &[T]) -> Result<Vec<T>> {
    check_len("spmv input", m.cols(), x.len())?;
    Ok(m.iter_rows().map(|r| r.dot(x)).collect())
}
