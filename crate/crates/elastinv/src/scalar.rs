//! Scalar abstraction for the numerical core.
//!
//! Everything geometric and algebraic in this crate is generic over a
//! floating-point scalar so the same kernels run in `f32` or `f64`.
//! Default tolerances quoted in doc comments are calibrated for `f64`.

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar usable by meshes, fields and solvers.
pub trait Scalar:
    Float
    + NumAssignOps
    + FromPrimitive
    + ToPrimitive
    + Default
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + std::iter::Sum
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for converting an `f64` literal into the working scalar.
#[inline]
pub fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal not representable in scalar type")
}

/// Converts the working scalar back to `f64` (for reports and serialization).
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("scalar not representable as f64")
}
