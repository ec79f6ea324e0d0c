//! Scalar abstractions shared by the numeric modules.
//!
//! [`Real`] covers the floating point paths (`f32`, `f64`); [`Field`] is the
//! weaker bound used where a computation is pure field arithmetic and should
//! also run over exact rationals.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, Num};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field scalar: floats as well as `BigRational`.
pub trait Field: Num + Clone + PartialOrd + FromPrimitive + Debug {}

impl<T> Field for T where T: Num + Clone + PartialOrd + FromPrimitive + Debug {}

/// Converts an `f64` literal into `T`.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in target float")
}

/// Converts a count into `T`.
#[inline]
pub(crate) fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in target float")
}
