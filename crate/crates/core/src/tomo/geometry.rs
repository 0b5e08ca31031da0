use crate::error::{Error, Result};

/// The line `{p : p·n = offset}` with unit normal `n = (cos θ, sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub theta: f64,
    pub offset: f64,
}

impl Ray {
    pub fn new(theta: f64, offset: f64) -> Self {
        Self { theta, offset }
    }

    pub fn normal(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (c, s)
    }

    /// Unit direction along the line.
    pub fn direction(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (-s, c)
    }

    /// Foot of the perpendicular from the origin; `t = 0` on the line.
    pub fn origin(&self) -> (f64, f64) {
        let (nx, ny) = self.normal();
        (self.offset * nx, self.offset * ny)
    }

    pub fn point(&self, t: f64) -> (f64, f64) {
        let (ox, oy) = self.origin();
        let (dx, dy) = self.direction();
        (ox + t * dx, oy + t * dy)
    }

    /// Parameter interval inside `[−1, 1]²`, if the ray crosses it.
    pub fn clip_to_field(&self) -> Option<(f64, f64)> {
        let (ox, oy) = self.origin();
        let (dx, dy) = self.direction();
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (o, d) in [(ox, dx), (oy, dy)] {
            if d.abs() < 1e-15 {
                if o.abs() >= 1.0 {
                    return None;
                }
            } else {
                let (t1, t2) = ((-1.0 - o) / d, (1.0 - o) / d);
                lo = lo.max(t1.min(t2));
                hi = hi.min(t1.max(t2));
            }
        }
        (hi > lo).then_some((lo, hi))
    }

    /// Length of the ray inside the field of view.
    pub fn field_chord(&self) -> f64 {
        self.clip_to_field().map_or(0.0, |(lo, hi)| hi - lo)
    }
}

/// Parallel-beam scan: `views` angles evenly spaced over `[0, π)`,
/// `detectors` rays per view centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayGeometry {
    pub views: usize,
    pub detectors: usize,
    pub spacing: f64,
}

impl RayGeometry {
    /// Detector spacing chosen so each view spans the field diagonal.
    pub fn new(views: usize, detectors: usize) -> Result<Self> {
        Self::with_spacing(views, detectors, 2.0 * std::f64::consts::SQRT_2 / detectors.max(1) as f64)
    }

    pub fn with_spacing(views: usize, detectors: usize, spacing: f64) -> Result<Self> {
        if views == 0 || detectors == 0 {
            return Err(Error::InvalidParameter("geometry needs at least one view and one detector".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("detector spacing must be positive, got {spacing}")));
        }
        Ok(Self { views, detectors, spacing })
    }

    pub fn ray_count(&self) -> usize {
        self.views * self.detectors
    }

    /// Rays ordered view-major.
    pub fn rays(&self) -> Vec<Ray> {
        let centre = (self.detectors as f64 - 1.0) / 2.0;
        (0..self.views)
            .flat_map(|k| {
                let theta = k as f64 * std::f64::consts::PI / self.views as f64;
                (0..self.detectors).map(move |d| Ray::new(theta, (d as f64 - centre) * self.spacing))
            })
            .collect()
    }
}

/// Intersection lengths of `ray` with the pixels of a `side × side` grid on
/// `[−1, 1]²`, as `(u·side + v, length)` sorted by pixel index (row `u`
/// counted from the top).
///
/// Walks the sorted parametric crossings with every grid line, so each
/// segment between consecutive crossings lies in exactly one pixel.
pub fn ray_row(ray: &Ray, side: usize) -> Vec<(usize, f64)> {
    let Some((t0, t1)) = ray.clip_to_field() else {
        return Vec::new();
    };
    let w = 2.0 / side as f64;
    let (ox, oy) = ray.origin();
    let (dx, dy) = ray.direction();

    let mut ts = Vec::with_capacity(2 * side + 2);
    ts.push(t0);
    ts.push(t1);
    for (o, d) in [(ox, dx), (oy, dy)] {
        if d.abs() < 1e-15 {
            continue;
        }
        for i in 1..side {
            let t = (-1.0 + i as f64 * w - o) / d;
            if t > t0 && t < t1 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|a, b| a.total_cmp(b));

    let clamp = |k: f64| (k.floor().max(0.0) as usize).min(side - 1);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(ts.len());
    for pair in ts.windows(2) {
        let len = pair[1] - pair[0];
        if len <= 0.0 {
            continue;
        }
        let (x, y) = ray.point(0.5 * (pair[0] + pair[1]));
        let v = clamp((x + 1.0) / w);
        let u = clamp((1.0 - y) / w);
        row.push((u * side + v, len));
    }
    row.sort_by_key(|&(j, _)| j);
    row.dedup_by(|next, prev| {
        if next.0 == prev.0 {
            prev.1 += next.1;
            true
        } else {
            false
        }
    });
    row
}
