//! The scalar abstraction the numerical core is generic over.
//!
//! Everything in this crate is written against [`Real`], which is satisfied by
//! `f32` and `f64`. Complex quantities are `Complex<T>` with `T: Real`. The
//! default tolerances throughout the crate are tuned for `f64`; `f32` works but
//! needs tolerances around `1e-4`.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable by every routine in the crate.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Convert an `f64` literal into this scalar (rounding for `f32`).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Lossy conversion to `f64`, used when values leave the generic core.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for the complex scalar over `T`.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn ci<T: Real>(im: T) -> C<T> {
    Complex::new(T::zero(), im)
}
