use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Floating point scalar used throughout the numerical modules: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Serialize + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every finite literal used in this crate is
    /// representable (possibly rounded) in both implementors.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal converts to scalar")
    }

    fn from_count(c: u64) -> Self {
        Self::from_u64(c).expect("count converts to scalar")
    }

    fn from_index(c: usize) -> Self {
        <Self as FromPrimitive>::from_usize(c).expect("index converts to scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
