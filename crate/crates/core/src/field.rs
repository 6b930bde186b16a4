//! The scalar abstraction every evaluator is generic over.
//!
//! Identity sides are written once against [`Field`] and instantiated with
//! [`ExactScalar`] for exact verification and with
//! [`BigReal`](crate::numeric::BigReal) for the numeric backend.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type ExactScalar = BigRational;

pub trait Field:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// An integer in the same representation (and precision) as `self`.
    fn lift(&self, n: i64) -> Self;

    /// Embed an exact rational in the same representation as `self`.
    fn from_exact(&self, value: &ExactScalar) -> Self;

    fn is_zero_value(&self) -> bool;

    /// Multiplicative inverse; a zero argument is a pole.
    fn inv(&self) -> Result<Self>;

    fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.inv()?)
    }

    fn zero_like(&self) -> Self {
        self.lift(0)
    }

    fn one_like(&self) -> Self {
        self.lift(1)
    }

    /// Integer power; negative exponents invert first.
    fn powi(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut exp = e.unsigned_abs();
        let mut acc = self.one_like();
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * sq.clone();
            }
            exp >>= 1;
            if exp > 0 {
                sq = sq.clone() * sq;
            }
        }
        Ok(acc)
    }
}

impl Field for BigRational {
    fn lift(&self, n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_exact(&self, value: &ExactScalar) -> Self {
        value.clone()
    }

    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }

    fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            Err(Error::pole("division by an exact zero"))
        } else {
            Ok(self.recip())
        }
    }

    fn powi(&self, e: i64) -> Result<Self> {
        if e < 0 && self.is_zero() {
            return Err(Error::pole("negative power of zero"));
        }
        let e = i32::try_from(e).map_err(|_| Error::domain("exponent out of range"))?;
        Ok(num_traits::Pow::pow(self, e))
    }
}

/// Parse `"p/q"`, `"p"` or a finite decimal such as `"-0.125"` into an exact
/// rational.
pub fn parse_rational(text: &str) -> Result<ExactScalar> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::schema("empty rational literal"));
    }
    let bad = || Error::schema(format!("cannot parse `{text}` as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::schema(format!("zero denominator in `{text}`")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac.is_empty())
        {
            return Err(bad());
        }
        let digits = format!("{int_digits}{frac}");
        let mantissa: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = BigRational::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Canonical text form: `"n/d"`, with `"n/1"` for integers so that every value
/// round-trips through the same shape.
pub fn format_rational(value: &ExactScalar) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn rat(num: i64, den: i64) -> ExactScalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn abs(value: &ExactScalar) -> ExactScalar {
    value.abs()
}

pub fn is_one(value: &ExactScalar) -> bool {
    value.is_one()
}
