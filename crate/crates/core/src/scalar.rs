//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the kernels are written against (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the value cannot be
    /// represented at all, which never happens for finite literals.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Largest argument `x` for which `exp(x)` is comfortably finite.
    fn exp_limit() -> Self;
}

impl Real for f32 {
    fn exp_limit() -> Self {
        80.0
    }
}

impl Real for f64 {
    fn exp_limit() -> Self {
        700.0
    }
}

/// Vacuum permeability in H/m.
#[inline]
pub fn mu0<T: Real>() -> T {
    T::lit(4.0e-7) * T::PI()
}
