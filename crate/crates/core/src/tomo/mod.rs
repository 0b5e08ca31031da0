//! Desk-scale tomography: an ellipse phantom, parallel-beam rays, exact
//! pixel-basis system rows, and the regularized-ART reconstruction driver.

mod geometry;
mod image;
mod phantom;
mod recon;

pub use geometry::{ray_row, Ray, RayGeometry};
pub use image::Image;
pub use phantom::{analytic_line_integral, digitize, Ellipse, Phantom};
pub use recon::{build_system, mean_integral, picture_distance, reconstruct, ReconProblem, Reconstruction};
