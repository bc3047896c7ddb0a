//! Scalar abstractions.
//!
//! Polynomials are generic over a [`Coefficient`] field (exact rationals by
//! default, machine floats at the solver boundary). Dense linear algebra and
//! the interior-point solver are generic over [`Real`].

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// A field usable as polynomial coefficients.
pub trait Coefficient:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact value, or the best rational with denominator at most `max_den`
    /// for floating types.
    fn to_rational(&self, max_den: u64) -> BigRational;
    /// Whether the coefficient is exact (no rounding in ring operations).
    fn is_exact() -> bool;
    fn is_negative(&self) -> bool;
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    /// Text form used by the canonical printer.
    fn to_text(&self) -> String;
}

impl Coefficient for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // numerator/denominator overflow f64 individually
            let n = self.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = self.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        })
    }
    fn to_rational(&self, _max_den: u64) -> BigRational {
        self.clone()
    }
    fn is_exact() -> bool {
        true
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_text(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

macro_rules! impl_float_coefficient {
    ($t:ty) => {
        impl Coefficient for $t {
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn from_rational(q: &BigRational) -> Self {
                <BigRational as Coefficient>::to_f64(q) as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn to_rational(&self, max_den: u64) -> BigRational {
                rationalize(*self as f64, max_den)
            }
            fn is_exact() -> bool {
                false
            }
            fn is_negative(&self) -> bool {
                *self < 0.0
            }
            fn to_text(&self) -> String {
                format!("{}", self)
            }
        }
    };
}

impl_float_coefficient!(f64);
impl_float_coefficient!(f32);

/// Floating point scalar for the numeric layers: f32 or f64.
pub trait Real: nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + Display + Default {
    /// Literal conversion from `f64`.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite literal")
    }
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f64 {}
impl Real for f32 {}

/// Exact rational from an `f64`, by continued fractions with the denominator
/// capped at `max_den`.
pub fn rationalize(x: f64, max_den: u64) -> BigRational {
    if !x.is_finite() {
        return BigRational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    // convergents p/q
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let cap = BigInt::from(max_den);
    for _ in 0..64 {
        let a = v.floor();
        let ai = BigInt::from_f64(a).unwrap_or_else(BigInt::zero);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > cap {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = v - a;
        if frac < 1e-300 {
            break;
        }
        v = 1.0 / frac;
        if !v.is_finite() {
            break;
        }
    }
    if q1.is_zero() {
        // x larger than any representable convergent with a capped denominator
        let r = BigRational::from_float(x.abs()).unwrap_or_else(BigRational::zero);
        return if neg { -r } else { r };
    }
    let r = BigRational::new(p1, q1);
    if neg {
        -r
    } else {
        r
    }
}
