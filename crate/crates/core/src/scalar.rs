//! Scalar abstraction shared by the solver, dictionary and linear-algebra code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values, which never happens for `f32`/`f64`.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
