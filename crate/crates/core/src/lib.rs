//! Projection methods for linear convex feasibility problems.
//!
//! The two-set methods (POCS, PPM and their extrapolated forms EAPM, EPPM)
//! live in [`feasibility`]; row-action ART and ART3+ in [`rowaction`];
//! linear programming by bisection in [`lp`]; a small tomography testbed in
//! [`tomo`]. All solvers are generic over [`Real`] (`f32` or `f64`).

mod error;
mod scalar;

pub mod experiment;
pub mod feasibility;
pub mod generate;
pub mod linalg;
pub mod lp;
pub mod projections;
pub mod rowaction;
pub mod tomo;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DenseMatrixF64 = linalg::DenseMatrix<f64>;
pub type SparseRowMatrixF64 = linalg::SparseRowMatrix<f64>;
pub type TwoSetProblemF64 = feasibility::TwoSetProblem<f64>;
pub type IntervalSystemF64 = rowaction::IntervalSystem<f64>;
pub type LpProblemF64 = lp::LpProblem<f64>;
pub type ReconProblemF64 = tomo::ReconProblem<f64>;
