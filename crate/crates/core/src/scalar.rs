use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::distr::uniform::SampleUniform;

/// Floating-point scalar the numeric core is generic over.
///
/// Satisfied by `f32` and `f64`; the crate-root aliases pin `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + SampleUniform
    + FromStr
    + Display
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion for counts and indices.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as scalar")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + SampleUniform
        + FromStr
        + Display
        + Debug
        + Default
        + Send
        + Sync
        + 'static
{
}
