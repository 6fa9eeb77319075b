//! Scalar abstraction for the value-level math.
//!
//! The tensor and material-point layers are generic over [`Real`] so the
//! same invariant and constitutive formulas can be exercised in `f32` or
//! `f64`. The mesh and solver layers are concrete `f64`; the crate root
//! exposes aliases for that choice.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable by the tensor and constitutive layers.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {
    /// Lossy conversion from `f64`, used for literals in generic formulas.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Macaulay bracket: the positive part of `x`.
pub fn macaulay<T: Real>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}
