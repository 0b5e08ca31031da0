use crate::error::{Error, Result};
use crate::tomo::{Image, Ray};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: (f64, f64),
    pub semi_axes: (f64, f64),
    /// Counter-clockwise rotation of the first semi-axis, radians.
    pub angle: f64,
    /// Added to every point inside the ellipse.
    pub density: f64,
}

impl Ellipse {
    pub fn new(center: (f64, f64), semi_axes: (f64, f64), angle: f64, density: f64) -> Result<Self> {
        if !(semi_axes.0 > 0.0 && semi_axes.1 > 0.0) {
            return Err(Error::InvalidParameter("ellipse semi-axes must be positive".into()));
        }
        if !density.is_finite() || !angle.is_finite() || !center.0.is_finite() || !center.1.is_finite() {
            return Err(Error::NonFinite("ellipse"));
        }
        Ok(Self { center, semi_axes, angle, density })
    }

    /// Maps a point into the frame where the ellipse is the unit disc.
    fn to_unit(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        ((c * dx + s * dy) / self.semi_axes.0, (-s * dx + c * dy) / self.semi_axes.1)
    }

    fn direction_to_unit(&self, dx: f64, dy: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        ((c * dx + s * dy) / self.semi_axes.0, (-s * dx + c * dy) / self.semi_axes.1)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (u, v) = self.to_unit(x, y);
        u * u + v * v <= 1.0
    }

    /// Length of the chord cut by `ray` (zero when it misses).
    pub fn chord(&self, ray: &Ray) -> f64 {
        let (px, py) = ray.origin();
        let (dx, dy) = ray.direction();
        let (qx, qy) = self.to_unit(px, py);
        let (ex, ey) = self.direction_to_unit(dx, dy);
        let a = ex * ex + ey * ey;
        let b = 2.0 * (qx * ex + qy * ey);
        let c = qx * qx + qy * qy - 1.0;
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            0.0
        } else {
            disc.sqrt() / a
        }
    }
}

/// Sum of ellipses on the field of view `[−1, 1]²`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Phantom {
    pub ellipses: Vec<Ellipse>,
}

impl Phantom {
    pub fn new(ellipses: Vec<Ellipse>) -> Self {
        Self { ellipses }
    }

    /// Six-ellipse head-like layout used by the experiments (version 1).
    pub fn head() -> Self {
        let e = |c, a, angle, d| Ellipse { center: c, semi_axes: a, angle, density: d };
        Self::new(vec![
            e((0.0, 0.0), (0.72, 0.92), 0.0, 1.0),
            e((0.0, -0.02), (0.66, 0.86), 0.0, -0.6),
            e((0.22, 0.05), (0.12, 0.30), -0.35, 0.3),
            e((-0.24, 0.08), (0.16, 0.36), 0.30, 0.3),
            e((0.0, 0.45), (0.20, 0.14), 0.0, 0.2),
            e((0.05, -0.55), (0.10, 0.06), 0.5, 0.5),
        ])
    }

    pub fn density_at(&self, x: f64, y: f64) -> f64 {
        self.ellipses.iter().filter(|e| e.contains(x, y)).map(|e| e.density).sum()
    }
}

/// Samples the phantom at the centres of a `side × side` grid over `[−1, 1]²`.
/// Row 0 is the top of the field.
pub fn digitize<T: Real>(phantom: &Phantom, side: usize) -> Result<Image<T>> {
    if side < 2 {
        return Err(Error::InvalidParameter(format!("image side must be at least 2, got {side}")));
    }
    let w = 2.0 / side as f64;
    let mut data = Vec::with_capacity(side * side);
    for u in 0..side {
        let y = 1.0 - (u as f64 + 0.5) * w;
        for v in 0..side {
            let x = -1.0 + (v as f64 + 0.5) * w;
            data.push(T::cst(phantom.density_at(x, y)));
        }
    }
    Image::new(side, data)
}

/// Exact line integral of the phantom along `ray`.
pub fn analytic_line_integral(phantom: &Phantom, ray: &Ray) -> f64 {
    phantom.ellipses.iter().map(|e| e.density * e.chord(ray)).sum()
}
