//! Floating point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used for times, coefficients and states: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + serde::Serialize + 'static
{
    /// Converts an `f64` literal. Every literal used by the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal converts to scalar")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used when deciding which side of a threshold a computed
    /// margin falls on; scales with the magnitude of the terms that produced it.
    #[inline]
    fn classification_tolerance(scale: Self) -> Self {
        Self::lit(64.0) * Self::epsilon() * scale.abs().max(Self::one())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
