//! Double-double arithmetic (about 32 significant digits) for real and
//! complex values.
//!
//! Used where double precision is provably insufficient: eigenvalues of
//! the strongly non-normal mass matrices have condition numbers far beyond
//! `1/ε` once `N` reaches a few dozen.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::field::Rational;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Nearest double-double to an exact rational.
    pub fn from_rational(r: &Rational) -> Self {
        use num_traits::ToPrimitive;
        let hi = r.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() || hi == 0.0 {
            return Self::new(hi);
        }
        let hi_exact = Rational::from_float(hi).expect("finite float");
        let lo = (r - hi_exact).to_f64().unwrap_or(0.0);
        let (h, l) = quick_two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let diff = ((self.hi - p) - e + self.lo) / (2.0 * x);
        let (h, l) = quick_two_sum(x, diff);
        Self { hi: h, lo: l }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * Self::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Self::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DdComplex {
    pub re: DoubleDouble,
    pub im: DoubleDouble,
}

impl DdComplex {
    pub const ZERO: Self = Self {
        re: DoubleDouble::ZERO,
        im: DoubleDouble::ZERO,
    };
    pub const ONE: Self = Self {
        re: DoubleDouble::ONE,
        im: DoubleDouble::ZERO,
    };

    pub fn new(re: DoubleDouble, im: DoubleDouble) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: DoubleDouble) -> Self {
        Self {
            re,
            im: DoubleDouble::ZERO,
        }
    }

    pub fn from_c64(z: Complex64) -> Self {
        Self {
            re: DoubleDouble::new(z.re),
            im: DoubleDouble::new(z.im),
        }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn norm_sqr(self) -> DoubleDouble {
        self.re * self.re + self.im * self.im
    }

    /// Modulus rounded to `f64` (enough for pivot selection and tests).
    pub fn norm_f64(self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn scale(self, s: DoubleDouble) -> Self {
        Self {
            re: self.re * s,
            im: self.im * s,
        }
    }
}

impl Add for DdComplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for DdComplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Neg for DdComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl Mul for DdComplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Div for DdComplex {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        // Scale by the larger component of the divisor to avoid overflow.
        let s = DoubleDouble::new(1.0 / o.re.hi.abs().max(o.im.hi.abs()));
        let os = o.scale(s);
        let num = self.scale(s) * os.conj();
        let den = os.norm_sqr();
        Self::new(num.re / den, num.im / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    #[test]
    fn one_third_round_trip() {
        let third = DoubleDouble::ONE / DoubleDouble::new(3.0);
        let back = third * DoubleDouble::new(3.0) - DoubleDouble::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        let exact = DoubleDouble::from_rational(&Rational::from_ratio(1, 3));
        assert!((exact - third).to_f64().abs() < 1e-32);
    }

    #[test]
    fn sqrt_two_squared() {
        let r = DoubleDouble::new(2.0).sqrt();
        assert!((r * r - DoubleDouble::new(2.0)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn complex_division() {
        let a = DdComplex::from_c64(Complex64::new(1.0, 2.0));
        let b = DdComplex::from_c64(Complex64::new(3.0, -4.0));
        let q = (a / b) * b - a;
        assert!(q.norm_f64() < 1e-30);
    }
}
