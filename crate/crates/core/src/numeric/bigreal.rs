use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::ops::BitTest;
use dashu_int::IBig;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::field::{ExactScalar, Field};

type Repr = FBig<HalfEven, 2>;

pub const DEFAULT_PRECISION: usize = 192;

/// Extra bits carried through `exp`/`ln` for real powers.
const GUARD_BITS: usize = 32;

/// Binary floating-point number with a fixed working precision in bits.
///
/// Arithmetic between values of different precision runs at the larger one.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigReal {
    v: Repr,
}

impl BigReal {
    fn wrap(v: Repr, prec: usize) -> Self {
        BigReal { v: v.with_precision(prec).value() }
    }

    pub fn from_i64(n: i64, prec: usize) -> Self {
        Self::wrap(Repr::from(n), prec)
    }

    pub fn zero(prec: usize) -> Self {
        Self::from_i64(0, prec)
    }

    pub fn one(prec: usize) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_rational(r: &ExactScalar, prec: usize) -> Self {
        let num = to_ibig(r.numer());
        let den = to_ibig(r.denom());
        let num = Self::wrap(Repr::from(num), prec);
        let den = Self::wrap(Repr::from(den), prec);
        BigReal { v: num.v / den.v }
    }

    pub fn precision(&self) -> usize {
        self.v.precision()
    }

    pub fn with_precision(&self, prec: usize) -> Self {
        Self::wrap(self.v.clone(), prec)
    }

    pub fn is_zero(&self) -> bool {
        self.v.repr().significand() == &IBig::ZERO
    }

    pub fn is_negative(&self) -> bool {
        self.v < Repr::ZERO
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Integer value if this number is an exact integer of moderate size.
    pub fn as_integer(&self) -> Option<i64> {
        if self.v.fract() != Repr::ZERO {
            return None;
        }
        let int = self.v.to_int().value();
        i64::try_from(int).ok()
    }

    pub fn ln(&self) -> Result<Self> {
        if self.is_negative() || self.is_zero() {
            return Err(Error::domain(format!("logarithm of non-positive value {self}")));
        }
        Ok(BigReal { v: self.v.ln() })
    }

    pub fn exp(&self) -> Self {
        BigReal { v: self.v.exp() }
    }

    /// `self^e` for real `e`. Integral exponents use repeated squaring so
    /// that the exact-integer case stays exact where possible; otherwise
    /// `exp(e ln self)` with guard bits, which needs a positive base.
    pub fn pow_real(&self, e: &BigReal) -> Result<Self> {
        if let Some(k) = e.as_integer() {
            return self.powi(k);
        }
        if self.is_negative() || self.is_zero() {
            return Err(Error::domain(format!("real power of non-positive base {self}")));
        }
        let prec = self.precision().max(e.precision());
        let base = self.with_precision(prec + GUARD_BITS);
        let ex = e.with_precision(prec + GUARD_BITS);
        let out = (ex * base.ln()?).exp();
        Ok(out.with_precision(prec))
    }

    pub fn to_f64(&self) -> f64 {
        self.v.to_f64().value()
    }

    /// Base-2 exponent estimate: `floor(log2 |self|)`, or `None` for zero.
    pub fn log2_floor(&self) -> Option<isize> {
        if self.is_zero() {
            return None;
        }
        let r = self.v.repr();
        let bits = r.significand().bit_len() as isize;
        Some(r.exponent() + bits - 1)
    }

    /// `true` if `|self| < 2^e`.
    pub fn below_pow2(&self, e: isize) -> bool {
        self.log2_floor().is_none_or(|l| l < e)
    }

    /// Decimal rendering with enough digits for the working precision.
    pub fn to_decimal_string(&self) -> String {
        let digits = ((self.precision() as f64) * std::f64::consts::LOG10_2).ceil() as usize + 1;
        self.to_decimal_digits(digits)
    }

    pub fn to_decimal_digits(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let d = self.v.clone().with_base_and_precision::<10>(digits).value();
        d.to_string()
    }

    /// Parse a decimal or `p/q` literal at the given precision.
    pub fn parse(text: &str, prec: usize) -> Result<Self> {
        let r = crate::field::parse_rational(text)?;
        Ok(Self::from_rational(&r, prec))
    }
}

fn to_ibig(n: &num_bigint::BigInt) -> IBig {
    if let Some(small) = n.to_i128() {
        return IBig::from(small);
    }
    let (sign, bytes) = n.to_bytes_le();
    let mag = IBig::from(dashu_int::UBig::from_le_bytes(&bytes));
    if sign == num_bigint::Sign::Minus {
        -mag
    } else {
        mag
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({}, prec={})", self.to_decimal_digits(24), self.precision())
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl Add for BigReal {
    type Output = BigReal;
    fn add(self, rhs: Self) -> Self {
        BigReal { v: self.v + rhs.v }
    }
}

impl Sub for BigReal {
    type Output = BigReal;
    fn sub(self, rhs: Self) -> Self {
        BigReal { v: self.v - rhs.v }
    }
}

impl Mul for BigReal {
    type Output = BigReal;
    fn mul(self, rhs: Self) -> Self {
        BigReal { v: self.v * rhs.v }
    }
}

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> Self {
        BigReal { v: -self.v }
    }
}

impl Field for BigReal {
    fn lift(&self, n: i64) -> Self {
        Self::from_i64(n, self.precision())
    }

    fn from_exact(&self, value: &ExactScalar) -> Self {
        Self::from_rational(value, self.precision())
    }

    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }

    fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::pole("division by a floating zero"));
        }
        Ok(BigReal { v: self.one_like().v / self.v.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    #[test]
    fn rational_round_trip_to_f64() {
        let x = BigReal::from_rational(&rat(-7, 16), 192);
        assert_eq!(x.to_f64(), -0.4375);
        assert_eq!(x.precision(), 192);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = rat(3, 1).powi(200).unwrap() / rat(2, 1).powi(300).unwrap();
        let x = BigReal::from_rational(&big, 256);
        let expect = 200.0 * 3f64.log2() - 300.0;
        assert!((x.to_f64().log2() - expect).abs() < 1e-9);
    }

    #[test]
    fn real_power_matches_square_root() {
        let q = BigReal::from_rational(&rat(1, 4), 192);
        let half = BigReal::from_rational(&rat(1, 2), 192);
        let r = q.pow_real(&half).unwrap();
        let diff = (r - BigReal::from_rational(&rat(1, 2), 192)).abs();
        assert!(diff.below_pow2(-185));
    }

    #[test]
    fn integer_detection() {
        assert_eq!(BigReal::from_i64(-3, 64).as_integer(), Some(-3));
        assert_eq!(BigReal::from_rational(&rat(1, 3), 64).as_integer(), None);
    }

    #[test]
    fn zero_inverse_is_a_pole() {
        assert!(matches!(BigReal::zero(64).inv(), Err(Error::Pole(_))));
    }

    #[test]
    fn magnitude_exponent() {
        let x = BigReal::from_rational(&rat(3, 1024), 64);
        assert_eq!(x.log2_floor(), Some(-9));
        assert!(x.below_pow2(-8));
        assert!(!x.below_pow2(-9));
    }
}
