//! Scalar abstraction: all geometry, sampling and training code is generic
//! over `f32`/`f64` through this trait.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar used throughout the crate.
///
/// `RealField` supplies the elementary functions and linear algebra,
/// the `num_traits` bounds supply conversions, and `std_normal` supplies
/// Gaussian sampling (implemented per concrete type because
/// `StandardNormal` is only defined for `f32` and `f64`).
pub trait Scalar: RealField + FromPrimitive + ToPrimitive + Copy {
    /// Draw a standard-normal sample from `rng`.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Conversion from `f64`, lossy for `f32`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    /// Conversion to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f32 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for f64 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}
