//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal; every `f64` literal is representable (possibly rounded).
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal converts to scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Unit roundoff of the type.
    #[inline]
    fn unit_roundoff() -> Self {
        Self::epsilon() * Self::c(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}
