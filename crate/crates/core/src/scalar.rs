//! Scalar abstractions.
//!
//! Numerical kernels are written against [`Real`] (implemented for `f32` and
//! `f64`), exact linear algebra against [`ExactField`] (implemented for
//! [`BigRational`] and for [`AlgebraicElement`](crate::algebra::AlgebraicElement)).

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, One, ToPrimitive, Zero};

/// Floating point scalar used by the numerical kernels.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Sum + Send + Sync + 'static
{
    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("usize converts")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact commutative field arithmetic, as needed by Gaussian elimination.
///
/// Elements that belong to a runtime-selected number field cannot produce a
/// context-free zero, hence `zero_like`/`one_like` instead of `num_traits::Zero`.
pub trait ExactField:
    Clone
    + PartialEq
    + Debug
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + Neg<Output = Self>
{
    fn is_zero_elem(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn try_inv(&self) -> Option<Self>;
}

impl ExactField for BigRational {
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }

    fn zero_like(&self) -> Self {
        BigRational::zero()
    }

    fn one_like(&self) -> Self {
        BigRational::one()
    }

    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerators and denominators: scale down before dividing.
    let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
    let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// Division helper shared by `ExactField` implementors.
pub fn exact_div<F: ExactField>(a: &F, b: &F) -> Option<F> {
    b.try_inv().map(|inv| a.clone() * &inv)
}
