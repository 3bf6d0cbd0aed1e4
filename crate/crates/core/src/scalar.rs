//! Floating-point scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the reducers and the clustering code are generic over.
///
/// Implemented for `f32` and `f64`. Image processing and row building work
/// in `f64` throughout; the numeric back half of the pipeline can run in
/// either precision.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; used for literals and RNG draws.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Conversion from a count.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
