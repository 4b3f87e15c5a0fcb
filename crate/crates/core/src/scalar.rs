use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

use crate::subcarrier::AssignCost;

/// Floating point type the allocation engine is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// assume `f64`; with `f32` the same algorithms run but stop at the coarser
/// machine resolution.
pub trait Scalar: Float + FromPrimitive + AssignCost + Debug + Display + Default + Sum + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `log2(1 + x)` without cancellation for small `x`.
    fn log2_1p(self) -> Self {
        self.ln_1p() / Self::LN_2()
    }

    /// Relative slack allowed when checking constraints:
    /// [`FEASIBILITY_RTOL`](crate::model::FEASIBILITY_RTOL), or a small
    /// multiple of the machine epsilon if that is coarser.
    fn feasibility_rtol() -> Self {
        Self::lit(crate::model::FEASIBILITY_RTOL).max(Self::epsilon() * Self::lit(1024.0))
    }

    #[allow(non_snake_case)]
    fn LN_2() -> Self {
        Self::lit(std::f64::consts::LN_2)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `value <= bound` up to a relative slack of `rel`.
pub(crate) fn approx_le<T: Scalar>(value: T, bound: T, rel: T) -> bool {
    value <= bound + rel * bound.abs().max(T::one())
}
