//! Scalar abstraction shared by every numerical kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a scalar back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Numerical thresholds used across the crate.
///
/// `standard()` gives 1e-9 for linear solves, 1e-7 for eigenvalue work and
/// 1e-8 (relative) for rank decisions in double precision; in single
/// precision each is floored at a multiple of machine epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub solve: T,
    pub eig: T,
    pub rank: T,
}

impl<T: Real> Tolerances<T> {
    pub fn standard() -> Self {
        let eps = T::epsilon();
        Self {
            solve: lit::<T>(1e-9).max(eps * lit(1e4)),
            eig: lit::<T>(1e-7).max(eps * lit(1e5)),
            rank: lit::<T>(1e-8).max(eps * lit(1e3)),
        }
    }
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self::standard()
    }
}
