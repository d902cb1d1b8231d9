//! Floating-point scalar abstraction used by the linear-algebra and
//! measurement layers.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real scalar: `f32` or `f64`.
///
/// Tolerances throughout the crate are stated for double precision. They are
/// passed through [`Real::tol`], which loosens them for single precision.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Draws one standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draws one uniform variate on `[0, 1)`.
    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Maps a tolerance stated for `f64` onto this precision.
    fn tol(f64_tolerance: f64) -> Self;

    /// Literal conversion; panics only for values not representable at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable as scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f64>()
    }

    #[inline]
    fn tol(f64_tolerance: f64) -> Self {
        f64_tolerance
    }
}

impl Real for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f32>()
    }

    // single precision carries ~7 digits; 1e-10 becomes 1e-5
    #[inline]
    fn tol(f64_tolerance: f64) -> Self {
        (f64_tolerance * 1e5) as f32
    }
}
