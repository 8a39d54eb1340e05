//! Floating point abstraction shared by every estimator in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real scalar the filters are generic over: `f32` or `f64`.
///
/// Random variates are always drawn in `f64` and narrowed afterwards, so a
/// given seed consumes the random stream identically for both widths.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or parameter.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Standard normal variate.
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let z: f64 = StandardNormal.sample(rng);
        Self::lit(z)
    }

    /// Uniform variate on `[0, 1)`.
    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let u: f64 = rng.random();
        // narrowing to f32 may round up to 1.0
        let v = Self::lit(u);
        if v >= Self::one() {
            Self::one() - Self::epsilon()
        } else {
            v
        }
    }

    /// Round half to even.
    fn round_half_even(self) -> Self {
        let r = self.round();
        let two = Self::lit(2.0);
        if (self - self.trunc()).abs() == Self::lit(0.5) {
            two * (self / two).round()
        } else {
            r
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Wraps an angle into `[-pi, pi)`.
pub fn normalize_angle<F: Scalar>(theta: F) -> F {
    let pi = F::PI();
    let two_pi = pi + pi;
    if theta >= -pi && theta < pi {
        return theta;
    }
    let mut r = theta - two_pi * ((theta + pi) / two_pi).floor();
    if r >= pi {
        r = r - two_pi;
    }
    if r < -pi {
        r = -pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_wraps_into_half_open_interval() {
        assert_eq!(normalize_angle(PI), -PI);
        assert_eq!(normalize_angle(-PI), -PI);
        assert!((normalize_angle(3.0 * PI + 0.25) - (-PI + 0.25)).abs() < 1e-12);
        assert!((normalize_angle(-0.5f64) + 0.5).abs() < 1e-15);
        assert_eq!(normalize_angle(PI as f32), -(PI as f32));
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(2.5f64.round_half_even(), 2.0);
        assert_eq!(3.5f64.round_half_even(), 4.0);
        assert_eq!(2.4f64.round_half_even(), 2.0);
        assert_eq!((0.01f64 * 500.0).round_half_even(), 5.0);
        assert_eq!((-2.5f64).round_half_even(), -2.0);
    }
}
