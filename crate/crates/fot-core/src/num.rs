//! Generic scalar abstraction for the numeric kernels.
//!
//! The aggregation, unfairness, distribution and LP modules are written
//! against [`Real`] so they work with `f32` or `f64`. Everything above them
//! (instances, schedules, the relaxation pipeline) uses the crate-level
//! [`crate::Scalar`] alias.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable in the solver kernels.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + 'static {
    /// Lossless-enough conversion from an `f64` literal (tolerances, weights).
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
