use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::check_len;
use crate::Real;

/// Square image, row-major with row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    side: usize,
    data: Vec<T>,
}

impl<T: Real> Image<T> {
    pub fn new(side: usize, data: Vec<T>) -> Result<Self> {
        check_len("image data", side * side, data.len())?;
        Ok(Self { side, data })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, u: usize, v: usize) -> T {
        self.data[u * self.side + v]
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Binary 16-bit PGM, linearly rescaled from `[min, max]` to `[0, 65535]`.
    pub fn write_pgm16(&self, w: &mut impl Write) -> Result<()> {
        let (lo, hi) = self
            .data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.as_f64()), hi.max(v.as_f64())));
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image"));
        }
        writeln!(w, "P5\n{} {}\n65535", self.side, self.side)?;
        let span = hi - lo;
        let mut bytes = Vec::with_capacity(2 * self.data.len());
        for v in &self.data {
            let level = if span > 0.0 { ((v.as_f64() - lo) / span * 65535.0).round() as u16 } else { 0 };
            bytes.extend_from_slice(&level.to_be_bytes());
        }
        w.write_all(&bytes)?;
        Ok(())
    }

    /// One line per image row, comma separated.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        for row in self.data.chunks(self.side.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.as_f64().to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}
