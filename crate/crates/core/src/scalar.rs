use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar accepted by the signal-processing routines: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Sum + Debug + Display + Default {
    /// Lossy conversion from `f64`; used for literals and configuration values.
    fn of(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).unwrap_or_else(Self::nan)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
