//! Matrix Market exchange files: `coordinate` for sparse matrices, `array`
//! (column-major) for dense matrices and vectors. Values are written with 17
//! significant digits so a write/read round trip is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseRowMatrix};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum MarketMatrix<T> {
    Sparse(SparseRowMatrix<T>),
    Dense(DenseMatrix<T>),
}

impl<T: Real> MarketMatrix<T> {
    pub fn into_dense(self) -> DenseMatrix<T> {
        match self {
            Self::Sparse(s) => s.to_dense(),
            Self::Dense(d) => d,
        }
    }

    pub fn into_sparse(self) -> SparseRowMatrix<T> {
        match self {
            Self::Sparse(s) => s,
            Self::Dense(d) => SparseRowMatrix::from_dense(&d),
        }
    }
}

fn fmt_value<T: Real>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

fn mm_err(line: usize, message: impl Into<String>) -> Error {
    Error::MatrixMarket { line, message: message.into() }
}

pub fn write_matrix_market<T: Real>(m: &MarketMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match m {
        MarketMatrix::Sparse(s) => write_sparse(s, &[], &mut w)?,
        MarketMatrix::Dense(d) => write_dense(d, &[], &mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// Writes a sparse matrix in coordinate format with optional `%` comment lines.
pub fn write_sparse<T: Real>(m: &SparseRowMatrix<T>, comments: &[String], w: &mut impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    for c in comments {
        writeln!(w, "% {c}")?;
    }
    writeln!(w, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (i, row) in m.iter_rows().enumerate() {
        for (&j, &v) in row.indices.iter().zip(row.values) {
            writeln!(w, "{} {} {}", i + 1, j + 1, fmt_value(v))?;
        }
    }
    Ok(())
}

/// Writes a dense matrix in array format (column-major).
pub fn write_dense<T: Real>(m: &DenseMatrix<T>, comments: &[String], w: &mut impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    for c in comments {
        writeln!(w, "% {c}")?;
    }
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            writeln!(w, "{}", fmt_value(m.get(i, j)))?;
        }
    }
    Ok(())
}

/// Writes a vector as an `len × 1` array file.
pub fn write_vector<T: Real>(v: &[T], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for &x in v {
        writeln!(w, "{}", fmt_value(x))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market<T: Real>(path: impl AsRef<Path>) -> Result<MarketMatrix<T>> {
    parse(BufReader::new(File::open(path)?))
}

/// Reads an `len × 1` (or `1 × len`) array file as a vector.
pub fn read_vector<T: Real>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    match read_matrix_market::<T>(path)? {
        MarketMatrix::Dense(d) if d.cols() == 1 || d.rows() == 1 => Ok(d.into_vec()),
        MarketMatrix::Dense(d) => Err(mm_err(0, format!("expected a vector, found {}x{}", d.rows(), d.cols()))),
        MarketMatrix::Sparse(_) => Err(mm_err(0, "expected an array-format vector")),
    }
}

fn parse_value<T: Real>(tok: Option<&str>, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| mm_err(line, "missing value"))?;
    let v: f64 = tok.parse().map_err(|_| mm_err(line, format!("bad number {tok:?}")))?;
    Ok(T::cst(v))
}

fn parse_index(tok: Option<&str>, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| mm_err(line, "missing index"))?;
    tok.parse().map_err(|_| mm_err(line, format!("bad index {tok:?}")))
}

/// Parses Matrix Market text from any buffered reader.
pub fn parse<T: Real>(reader: impl BufRead) -> Result<MarketMatrix<T>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| mm_err(1, "empty file"))?;
    let header = header?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(mm_err(1, format!("malformed header {header:?}")));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(mm_err(1, format!("unknown format {other:?}"))),
    };
    if !matches!(fields[3].as_str(), "real" | "integer" | "double") {
        return Err(mm_err(1, format!("unsupported field {:?}", fields[3])));
    }
    if fields[4] != "general" {
        return Err(mm_err(1, format!("unsupported symmetry {:?}", fields[4])));
    }

    let mut body = lines.filter_map(|(n, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        Ok(s) => Some(Ok((n, s))),
        Err(e) => Some(Err(e)),
    });

    let (size_line, sizes) = body.next().ok_or_else(|| mm_err(2, "missing size line"))??;
    let mut toks = sizes.split_whitespace();
    let rows = parse_index(toks.next(), size_line)?;
    let cols = parse_index(toks.next(), size_line)?;

    if coordinate {
        let nnz = parse_index(toks.next(), size_line)?;
        let mut row_lists: Vec<Vec<(usize, T)>> = vec![Vec::new(); rows];
        let mut seen = std::collections::HashSet::with_capacity(nnz);
        let mut count = 0;
        for item in body {
            let (n, text) = item?;
            let mut t = text.split_whitespace();
            let i = parse_index(t.next(), n)?;
            let j = parse_index(t.next(), n)?;
            let v: T = parse_value(t.next(), n)?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(mm_err(n, format!("entry ({i}, {j}) outside declared {rows}x{cols}")));
            }
            if !seen.insert((i, j)) {
                return Err(mm_err(n, format!("duplicate entry ({i}, {j})")));
            }
            count += 1;
            row_lists[i - 1].push((j - 1, v));
        }
        if count != nnz {
            return Err(mm_err(size_line, format!("declared {nnz} entries, found {count}")));
        }
        Ok(MarketMatrix::Sparse(SparseRowMatrix::from_row_lists(cols, row_lists)?))
    } else {
        let mut dense = DenseMatrix::zeros(rows, cols);
        let mut k = 0;
        for item in body {
            let (n, text) = item?;
            for tok in text.split_whitespace() {
                if k >= rows * cols {
                    return Err(mm_err(n, "more values than declared"));
                }
                let v: T = parse_value(Some(tok), n)?;
                dense.set(k % rows.max(1), k / rows.max(1), v);
                k += 1;
            }
        }
        if k != rows * cols {
            return Err(mm_err(size_line, format!("declared {} values, found {k}", rows * cols)));
        }
        Ok(MarketMatrix::Dense(dense))
    }
}
