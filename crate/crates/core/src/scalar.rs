//! Scalar abstraction shared by every numeric kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating-point scalar used throughout the crate.
///
/// Implemented for `f32` and `f64`. The distributed solvers need `f64` to
/// reach relative errors near `1e-8`; `f32` is supported for the kernels and
/// for coarse runs.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant. Every value used in this crate is
    /// representable (possibly rounded) in both supported widths.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// `x.to_f64()` without the `Option`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sign with the tie rule `sign(0) = +1`.
#[inline]
pub fn sign_nonneg<T: Real>(w: T) -> T {
    if w >= T::zero() {
        T::one()
    } else {
        -T::one()
    }
}
