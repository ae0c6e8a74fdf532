use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the solvers are generic over: `f32` or `f64`.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display {}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub(crate) fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `j! / (j - q)!`, zero when `q > j`.
pub(crate) fn falling_factorial<T: Scalar>(j: usize, q: usize) -> T {
    if q > j {
        return T::zero();
    }
    let mut out = T::one();
    for m in (j - q + 1)..=j {
        out *= lit::<T>(m as f64);
    }
    out
}
