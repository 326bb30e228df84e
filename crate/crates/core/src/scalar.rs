//! Scalar abstraction for the closed-form layer.
//!
//! The analytic parts of the crate (polynomial classification, the Riccati
//! solution maps, the martingality classification) are written once over
//! [`Scalar`] and instantiated for `f32` and `f64`. The Monte Carlo engines
//! work in `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type usable by the closed-form layer.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Standard normal cumulative distribution function.
    fn norm_cdf(self) -> Self {
        let half = Self::lit(0.5);
        half * (-self / Self::SQRT_2()).erfc()
    }

    /// Converts an `f64` literal; panics only for types that cannot hold it.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Scalar for f32 {
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// `artanh` written as an exactly odd function.
pub(crate) fn odd_atanh<T: Scalar>(u: T) -> T {
    let s = u.abs().atanh();
    if u < T::zero() {
        -s
    } else {
        s
    }
}

/// `arcoth(u) = ½·ln((u+1)/(u-1))` for `|u| > 1`, exactly odd.
pub(crate) fn odd_acoth<T: Scalar>(u: T) -> T {
    let a = u.abs();
    let s = T::lit(0.5) * ((a + T::one()) / (a - T::one())).ln();
    if u < T::zero() {
        -s
    } else {
        s
    }
}

/// `arctan` written as an exactly odd function.
pub(crate) fn odd_atan<T: Scalar>(u: T) -> T {
    let s = u.abs().atan();
    if u < T::zero() {
        -s
    } else {
        s
    }
}
