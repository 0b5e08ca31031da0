use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{check_len, SparseRowMatrix};
use crate::rowaction::art_solve_with;
use crate::tomo::{analytic_line_integral, digitize, ray_row, Image, Phantom, RayGeometry};
use crate::Real;

/// Pixel-basis reconstruction problem for regularized ART.
#[derive(Debug, Clone)]
pub struct ReconProblem<T> {
    pub system: SparseRowMatrix<T>,
    /// Measured integrals (noise included).
    pub data: Vec<T>,
    pub clean_data: Vec<T>,
    pub sigma: T,
    pub lambda: T,
    pub truth: Image<T>,
}

impl<T: Real> ReconProblem<T> {
    pub fn side(&self) -> usize {
        self.truth.side()
    }

    pub fn with_params(mut self, sigma: T, lambda: T) -> Self {
        self.sigma = sigma;
        self.lambda = lambda;
        self
    }
}

/// Mean exact line integral over the rays of `geometry`, in pixel widths of
/// a `side × side` grid.
pub fn mean_integral(phantom: &Phantom, geometry: &RayGeometry, side: usize) -> f64 {
    let rays = geometry.rays();
    let total: f64 = rays.iter().map(|r| analytic_line_integral(phantom, r)).sum();
    total / rays.len() as f64 * side as f64 / 2.0
}

/// Builds the `M × J²` system of ray–pixel intersection lengths and the
/// measured data `b = exact integrals + N(0, noise_std²)`. Lengths, and
/// hence integrals and `noise_std`, are in pixel widths (`2/J` field units).
///
/// Defaults `σ = 5`, `λ = 0.05`.
pub fn build_system<T: Real>(
    phantom: &Phantom,
    geometry: &RayGeometry,
    side: usize,
    noise_std: f64,
    seed: u64,
) -> Result<ReconProblem<T>> {
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise_std must be nonnegative, got {noise_std}")));
    }
    let truth = digitize(phantom, side)?;
    let unit = side as f64 / 2.0;
    let rays = geometry.rays();
    let rows: Vec<Vec<(usize, T)>> = rays
        .par_iter()
        .map(|ray| ray_row(ray, side).into_iter().map(|(j, l)| (j, T::cst(l * unit))).collect())
        .collect();
    let system = SparseRowMatrix::from_row_lists(side * side, rows)?;
    let clean: Vec<f64> = rays.iter().map(|r| unit * analytic_line_integral(phantom, r)).collect();
    let data: Vec<f64> = if noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        clean.iter().map(|&v| v + normal.sample(&mut rng)).collect()
    } else {
        clean.clone()
    };
    Ok(ReconProblem {
        system,
        data: data.into_iter().map(T::cst).collect(),
        clean_data: clean.into_iter().map(T::cst).collect(),
        sigma: T::cst(5.0),
        lambda: T::cst(0.05),
        truth,
    })
}

/// `Σ|t − s| / Σ|t|`
pub fn picture_distance<T: Real>(truth: &[T], recon: &[T]) -> Result<T> {
    check_len("picture distance", truth.len(), recon.len())?;
    let denom: T = truth.iter().map(|t| t.abs()).sum();
    if denom == T::zero() {
        return Err(Error::ZeroReference);
    }
    let num: T = truth.iter().zip(recon).map(|(&t, &s)| (t - s).abs()).sum();
    Ok(num / denom)
}

#[derive(Debug, Clone)]
pub struct Reconstruction<T> {
    /// Image after each cycle; entry 0 is the zero start.
    pub images: Vec<Image<T>>,
    pub objective: Vec<T>,
    pub distance: Vec<T>,
    /// Cycle with the smallest picture distance.
    pub best_cycle: usize,
}

impl<T: Real> Reconstruction<T> {
    pub fn best_image(&self) -> &Image<T> {
        &self.images[self.best_cycle]
    }

    pub fn write_csv(&self, w: &mut impl Write, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "cycle,objective,r")?;
        for (k, (o, r)) in self.objective.iter().zip(&self.distance).enumerate() {
            writeln!(w, "{k},{},{}", o.as_f64(), r.as_f64())?;
        }
        Ok(())
    }
}

/// Runs `cycles` cycles of regularized ART and scores each against the truth.
pub fn reconstruct<T: Real>(problem: &ReconProblem<T>, cycles: usize) -> Result<Reconstruction<T>> {
    let side = problem.side();
    let truth = problem.truth.data();
    let mut images = vec![Image::new(side, vec![T::zero(); side * side])?];
    let mut distance = vec![picture_distance(truth, images[0].data())?];
    let mut failure = None;
    let run = art_solve_with(&problem.system, &problem.data, problem.sigma, problem.lambda, cycles, |_, x| {
        match picture_distance(truth, x) {
            Ok(r) => distance.push(r),
            Err(e) => failure = Some(e),
        }
        images.push(Image::new(side, x.to_vec()).expect("ART iterate has image length"));
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let best_cycle = distance
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map_or(0, |(k, _)| k);
    Ok(Reconstruction { images, objective: run.objective, distance, best_cycle })
}
