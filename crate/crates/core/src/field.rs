//! Scalar fields used by the closed-form matrix assembly.
//!
//! Every mass matrix in this crate has rational entries, so the assembly
//! routines are written once over [`Field`] and instantiated either with
//! `f64` or with [`Rational`] (arbitrary precision fractions). The exact
//! instantiation is what allows identities such as `M2 = J4^2` to be
//! checked entry by entry without a tolerance.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

pub trait Field:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    fn from_int(value: i64) -> Self {
        Self::from_ratio(value, 1)
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Field for Rational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        BigRational::from_integer(BigInt::from(1))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn is_zero(&self) -> bool {
        <BigRational as Zero>::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_is_exact() {
        let third = Rational::from_ratio(1, 3);
        let sum = third.clone() + third.clone() + third;
        assert_eq!(sum, Rational::one());
        assert!(Field::is_zero(
            &(Rational::from_ratio(2, 3) - Rational::from_ratio(4, 6))
        ));
        assert_eq!(Field::to_f64(&Rational::from_ratio(-3, 4)), -0.75);
    }
}
