//! Floating-point abstraction shared by the numeric core.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

/// Scalar bound used by every generic routine in the crate.
///
/// Implemented for `f32` and `f64`. Tolerances that depend on precision are
/// derived from `epsilon()` so the same code is honest for both widths.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant. Every literal used in the crate is
    /// representable (possibly rounded) in both supported widths.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Lossy widening, used for error payloads and reports.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Threshold below which `m` or `1 - m` counts as degenerate.
    #[inline]
    fn degeneracy_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(1e3))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for [`Real::lit`].
#[inline]
pub(crate) fn c<T: Real>(v: f64) -> T {
    T::lit(v)
}
