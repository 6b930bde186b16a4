//! Truncated Laurent series in a small parameter `eps`, used to take limits
//! such as `(1 - t) * side(t)` at `t = 1` without rewriting the side.
//!
//! Every value carries the order up to which it is known, so truncation
//! never silently corrupts a coefficient.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{int, ExactScalar, Field};

/// Order used for values that are exact polynomials.
const EXACT: i64 = 1 << 40;

/// Relative number of terms kept when inverting a non-monomial.
const RELATIVE_TERMS: i64 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    /// Exponent of `coeffs[0]`.
    val: i64,
    coeffs: Vec<ExactScalar>,
    /// The value is known modulo `eps^known`.
    known: i64,
}

impl Laurent {
    pub fn constant(c: ExactScalar) -> Self {
        Laurent { val: 0, coeffs: vec![c], known: EXACT }.normalized()
    }

    /// `c + eps`.
    pub fn shifted(c: ExactScalar) -> Self {
        Laurent { val: 0, coeffs: vec![c, int(1)], known: EXACT }.normalized()
    }

    fn normalized(mut self) -> Self {
        let keep = (self.known - self.val).clamp(0, self.coeffs.len() as i64) as usize;
        self.coeffs.truncate(keep);
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        self.coeffs.drain(..lead);
        self.val += lead as i64;
        if self.coeffs.is_empty() {
            self.val = self.known;
        }
        self
    }

    /// Lowest exponent that can be nonzero.
    fn lead(&self) -> i64 {
        if self.coeffs.is_empty() {
            self.known
        } else {
            self.val
        }
    }

    /// Coefficient of `eps^e`, if it is determined.
    pub fn coeff(&self, e: i64) -> Result<ExactScalar> {
        if e >= self.known {
            return Err(Error::domain(format!("coefficient of eps^{e} lost to truncation")));
        }
        let idx = e - self.val;
        Ok(if idx < 0 || idx >= self.coeffs.len() as i64 { int(0) } else { self.coeffs[idx as usize].clone() })
    }

    /// The constant term, requiring the value to be regular at `eps = 0`.
    pub fn regular_value(&self) -> Result<ExactScalar> {
        if self.lead() < 0 {
            return Err(Error::pole(format!("pole of order {} at eps = 0", -self.lead())));
        }
        self.coeff(0)
    }
}

fn sat(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        a + b
    }
}

impl Add for Laurent {
    type Output = Laurent;
    fn add(self, rhs: Self) -> Self {
        let known = self.known.min(rhs.known);
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            let nonzero = if self.coeffs.is_empty() { rhs } else { self };
            return Laurent { known, ..nonzero }.normalized();
        }
        let val = self.val.min(rhs.val);
        let end = (self.val + self.coeffs.len() as i64).max(rhs.val + rhs.coeffs.len() as i64);
        let len = (end - val).max(0) as usize;
        let mut coeffs = vec![int(0); len];
        for (j, c) in self.coeffs.into_iter().enumerate() {
            coeffs[(self.val - val) as usize + j] += c;
        }
        for (j, c) in rhs.coeffs.into_iter().enumerate() {
            coeffs[(rhs.val - val) as usize + j] += c;
        }
        Laurent { val, coeffs, known }.normalized()
    }
}

impl Neg for Laurent {
    type Output = Laurent;
    fn neg(mut self) -> Self {
        for c in &mut self.coeffs {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for Laurent {
    type Output = Laurent;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for Laurent {
    type Output = Laurent;
    fn mul(self, rhs: Self) -> Self {
        let known = sat(self.known, rhs.lead()).min(sat(rhs.known, self.lead()));
        let val = self.val + rhs.val;
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Laurent { val: known, coeffs: Vec::new(), known };
        }
        let mut coeffs = vec![int(0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Laurent { val, coeffs, known }.normalized()
    }
}

impl Field for Laurent {
    fn lift(&self, n: i64) -> Self {
        Laurent::constant(int(n))
    }

    fn from_exact(&self, value: &ExactScalar) -> Self {
        Laurent::constant(value.clone())
    }

    fn is_zero_value(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn inv(&self) -> Result<Self> {
        if self.coeffs.is_empty() {
            return Err(Error::pole("inverse of a series that vanishes to the known order"));
        }
        let terms = if self.known >= EXACT { RELATIVE_TERMS } else { (self.known - self.val).min(RELATIVE_TERMS) };
        let terms = terms as usize;
        let c0 = self.coeffs[0].clone();
        let mut out: Vec<ExactScalar> = Vec::with_capacity(terms);
        out.push(int(1) / c0.clone());
        for m in 1..terms {
            let mut acc = int(0);
            for j in 1..=m.min(self.coeffs.len() - 1) {
                acc += &self.coeffs[j] * &out[m - j];
            }
            out.push(-acc / c0.clone());
        }
        let exact = self.coeffs.len() == 1 && self.known >= EXACT;
        let known = if exact { EXACT } else { -self.val + terms as i64 };
        Ok(Laurent { val: -self.val, coeffs: out, known }.normalized())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    #[test]
    fn simple_pole_residue() {
        // (1 - t) / (1 - t q) / (1 - t) at t = 1 + eps equals 1 / (1 - q).
        let q = Laurent::constant(rat(1, 3));
        let t = Laurent::shifted(int(1));
        let one = t.one_like();
        let f = (one.clone() - t.clone()) * ((one.clone() - t.clone() * q).inv().unwrap()) * (one - t).inv().unwrap();
        assert_eq!(f.regular_value().unwrap(), rat(3, 2));
    }

    #[test]
    fn unresolved_pole_reported() {
        let eps = Laurent::shifted(int(0));
        assert!(matches!(eps.inv().unwrap().regular_value(), Err(Error::Pole(_))));
        assert!(matches!(Laurent::constant(int(0)).inv(), Err(Error::Pole(_))));
    }

    #[test]
    fn inverse_round_trip() {
        let a = Laurent::shifted(rat(2, 5)) * Laurent::shifted(rat(-1, 7));
        let b = a.inv().unwrap() * a;
        assert_eq!(b.regular_value().unwrap(), int(1));
        assert_eq!(b.coeff(3).unwrap(), int(0));
    }
}
