use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar accepted by the signal-processing routines.
///
/// Implemented for `f32` and `f64`. Catch22 and the learning stack are
/// fixed at `f64` because their reference behaviour is defined in double
/// precision.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + rustfft::FftNum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; panics only for values the type cannot represent at all.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean; `NaN` for an empty slice.
pub(crate) fn mean<T: Scalar>(x: &[T]) -> T {
    if x.is_empty() {
        return T::nan();
    }
    x.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(x.len())
}

/// Sample standard deviation (divisor n − 1); `NaN` for fewer than two values.
pub(crate) fn sample_sd<T: Scalar>(x: &[T]) -> T {
    if x.len() < 2 {
        return T::nan();
    }
    let m = mean(x);
    let ss = x.iter().fold(T::zero(), |a, &v| a + (v - m) * (v - m));
    (ss / T::from_usize_lossy(x.len() - 1)).sqrt()
}
