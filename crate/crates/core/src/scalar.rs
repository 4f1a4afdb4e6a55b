//! Scalar abstractions.
//!
//! Transition kernels are written once over [`Scalar`], which covers both
//! exact rationals and machine floats. Quadrature code is written over
//! [`Real`], any `num_traits::Float` with the usual constants; this admits
//! `f32`, `f64` and the double-double [`twofloat::TwoFloat`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};
use twofloat::TwoFloat;

/// A field element usable for transition probabilities.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    fn from_rational(q: &BigRational) -> Self;
    fn from_bigint(n: &BigInt) -> Self;
    fn to_f64_lossy(&self) -> f64;
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    const EXACT: bool = true;
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_rational(q: &BigRational) -> Self {
                q.to_f64().unwrap_or(f64::NAN) as $t
            }
            fn from_bigint(n: &BigInt) -> Self {
                n.to_f64().unwrap_or(f64::NAN) as $t
            }
            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
            const EXACT: bool = false;
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

/// Floating-point type used by the quadrature routines.
pub trait Real: Float + FloatConst + Debug + Send + Sync + 'static {
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
    fn half() -> Self {
        Self::from_f64(0.5)
    }
    fn two() -> Self {
        Self::from_f64(2.0)
    }
}

impl Real for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
}

/// Convert an exact rational into a [`Real`] without going through a single
/// `f64` rounding when the target carries more precision.
pub fn rational_to_real<T: Real>(q: &BigRational) -> T {
    let num = q.numer().to_f64().unwrap_or(f64::NAN);
    let den = q.denom().to_f64().unwrap_or(f64::NAN);
    T::from_f64(num) / T::from_f64(den)
}

/// Integer power by repeated squaring, for any [`Scalar`].
pub fn powu<S: Scalar>(base: &S, exp: u64) -> S {
    num_traits::pow::pow(base.clone(), exp as usize)
}
