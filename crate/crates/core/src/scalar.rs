//! Scalar abstraction shared by every solver.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the solvers are generic over: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant, rounding to the nearest representable value.
    fn cst(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    /// Lossless widening used for reporting and text output.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A relative tolerance that is never tighter than a few ulps of the type.
    fn rel_tol(v: f64) -> Self {
        Self::cst(v).max(Self::epsilon() * Self::cst(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}
