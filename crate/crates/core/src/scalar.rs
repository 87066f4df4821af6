//! Scalar fields used throughout the crate.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{GaudinError, Result};

pub type Rational = BigRational;

/// A field the workbench can compute over.
///
/// `EXACT` fields decide zero-ness by equality; floating fields leave rank
/// and zero decisions to the caller's tolerance.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    /// Absolute value as a float, used for pivoting and residual norms.
    fn modulus(&self) -> f64;
    fn to_c64(&self) -> Complex64;
    /// Nearest element to a complex float; exact fields drop the imaginary part.
    fn from_c64(c: Complex64) -> Self;

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }

    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn modulus(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn from_c64(c: Complex64) -> Self {
        Rational::from_float(c.re).unwrap_or_else(Zero::zero)
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_rational(q: &Rational) -> Self {
        Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn from_c64(c: Complex64) -> Self {
        c
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, an integer, or a finite decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Ok(q) = Rational::from_str(s) {
        return Ok(q);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body
        .split_once('.')
        .ok_or_else(|| GaudinError::Schema(format!("not a rational literal: {s:?}")))?;
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(GaudinError::Schema(format!("not a rational literal: {s:?}")));
    }
    let num = BigInt::from_str(&digits).map_err(|e| GaudinError::Schema(e.to_string()))?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = Rational::new(num, den);
    Ok(if neg { -q } else { q })
}

/// `"p/q"` for non-integers, `"p"` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Max modulus over a slice; zero for an empty slice.
pub fn max_modulus<F: Scalar>(v: &[F]) -> f64 {
    v.iter().map(Scalar::modulus).fold(0.0, f64::max)
}

pub fn norm2<F: Scalar>(v: &[F]) -> f64 {
    v.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
}

pub fn to_complex_vec<F: Scalar>(v: &[F]) -> Vec<Complex64> {
    v.iter().map(Scalar::to_c64).collect()
}
