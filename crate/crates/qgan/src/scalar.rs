use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numeric core is generic over.
///
/// Implemented for `f32` and `f64`; the crate-root type aliases default to
/// `f64`, which is what the CLI and the accuracy guarantees use.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` constant. Panics on values a float cannot
    /// represent at all (never the case for the literals used here).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Accepted departure of a unit-norm invariant from exactly 1
    /// (about 9e-13 for f64, loose enough to absorb gate round-off).
    fn unit_norm_tolerance() -> Self {
        Self::epsilon() * Self::of(4096.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Euclidean norm of a slice.
pub fn norm<T: Real>(values: &[T]) -> T {
    values.iter().map(|&x| x * x).sum::<T>().sqrt()
}
