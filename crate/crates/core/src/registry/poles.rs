//! Exact pole predicates for every registered identity.
//!
//! A parameter point is rejected when any denominator on either side of the
//! identity vanishes there. The checks are exact and run before evaluation,
//! so a rejected point never reaches the evaluators.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{int, ExactScalar, Field};
use crate::params::Symbol;

use super::instance::{IdentityInstance, ShapeKey};
use super::IdentityId;

fn sym(inst: &IdentityInstance, s: Symbol) -> Result<&ExactScalar> {
    inst.env.require(s)
}

fn nonzero(v: &ExactScalar, what: &str) -> Result<()> {
    if v.is_zero() {
        Err(Error::pole(format!("{what} = 0")))
    } else {
        Ok(())
    }
}

/// Reject `a q^e = 1` for any `e` in `lo..=hi`.
fn shifted(a: &ExactScalar, q: &ExactScalar, lo: i64, hi: i64, what: &str) -> Result<()> {
    for e in lo..=hi {
        if (a.clone() * q.powi(e)?).is_one() {
            return Err(Error::pole(format!("{what} q^{e} = 1")));
        }
    }
    Ok(())
}

/// Reject `a q^e = 1` for every `e >= lo`, assuming `0 < |q| < 1`. Once
/// `|a q^e| < 1` no later exponent can hit.
fn shifted_to_infinity(a: &ExactScalar, q: &ExactScalar, lo: i64, what: &str) -> Result<()> {
    if a.is_zero() {
        return Ok(());
    }
    let one = int(1);
    let mut e = lo;
    loop {
        let v = a.clone() * q.powi(e)?;
        if v.is_one() {
            return Err(Error::pole(format!("{what} q^{e} = 1")));
        }
        if v.abs() < one {
            return Ok(());
        }
        e += 1;
    }
}

fn base_q(q: &ExactScalar) -> Result<()> {
    if q.is_zero() || q.abs().is_one() {
        return Err(Error::pole(format!("q = {q} is excluded")));
    }
    Ok(())
}

fn is_inside_unit_disc(v: &ExactScalar) -> bool {
    v.abs() < int(1)
}

/// `Ok(())` when no denominator of `inst` vanishes.
pub fn check_poles(inst: &IdentityInstance) -> Result<()> {
    use IdentityId::*;
    let q = sym(inst, Symbol::Q)?;
    base_q(q)?;
    let n = || inst.need(ShapeKey::N);
    match inst.id {
        D1_1 | P1_3 | TA1_8 | TA1_9 | C2_14 | C2_15 | K1_2 => Ok(()),
        FL1_4 => nonzero(sym(inst, Symbol::X)?, "x"),
        Z1_5 => {
            nonzero(sym(inst, Symbol::X)?, "x")?;
            shifted(sym(inst, Symbol::Z)?, q, 1, n()?, "z")
        }
        GZ1_6 => {
            let z = sym(inst, Symbol::Z)?;
            nonzero(z, "z")?;
            shifted(z, q, -inst.need(ShapeKey::M)?, n()? - 1, "z")
        }
        PB1_10 | P4_1 => {
            let n = n()?;
            for z in inst.env.z_vec.iter().flatten() {
                shifted(z, q, 1, n, "z_j")?;
            }
            Ok(())
        }
        PB1_11 => {
            let n = n()?;
            for z in inst.env.z_vec.iter().flatten() {
                nonzero(z, "z_j")?;
                shifted(&z.inv()?, q, 1, n, "1/z_j")?;
            }
            Ok(())
        }
        C3_3 | L3_1 => shifted(sym(inst, Symbol::Z)?, q, 1, n()?, "z"),
        C3_4 | L3_2 => {
            let z = sym(inst, Symbol::Z)?;
            nonzero(z, "z")?;
            shifted(&z.inv()?, q, 1, n()?, "1/z")
        }
        FL3_5 | A3_7 => shifted(sym(inst, Symbol::Y)?, q, 1, n()?, "y"),
        P3_6 => {
            let n = n()?;
            let yz = sym(inst, Symbol::Y)? * sym(inst, Symbol::Z)?;
            let wx = sym(inst, Symbol::W)? * sym(inst, Symbol::X)?;
            shifted(&yz, q, 0, n - 1, "yz")?;
            shifted(&wx, q, 0, n - 1, "wx")
        }
        A3_8 => {
            let wx = sym(inst, Symbol::W)? * sym(inst, Symbol::X)?;
            shifted(&wx, q, 0, n()? - 1, "wx")
        }
        A3_9 | C3_10 => {
            let yz = sym(inst, Symbol::Y)? * sym(inst, Symbol::Z)?;
            shifted(&yz, q, 0, n()? - 1, "yz")
        }
        S4_2 | S4_3 | S4_4 | PC1_12 => {
            let n = n()?;
            let k = inst.need(ShapeKey::K)?;
            let z = sym(inst, Symbol::Z)?;
            shifted(z, q, -k, n - 1, "z")?;
            match inst.id {
                S4_3 => {
                    let xt = sym(inst, Symbol::X)? * sym(inst, Symbol::T)?;
                    shifted(&xt, q, 0, n - 1, "xt")
                }
                S4_4 => shifted(sym(inst, Symbol::T)?, q, 0, n - 1, "t"),
                PC1_12 => {
                    nonzero(z, "z")?;
                    shifted(sym(inst, Symbol::T)?, q, 0, n - 1, "t")
                }
                _ => Ok(()),
            }
        }
        S4_5 => {
            nonzero(sym(inst, Symbol::Z)?, "z")?;
            shifted(sym(inst, Symbol::T)?, q, 0, inst.need(ShapeKey::I)? - 1, "t")
        }
        E4_7 => shifted(sym(inst, Symbol::Z)?, q, 0, n()? - 1, "z"),
        NB3 => shifted(sym(inst, Symbol::Z)?, q, inst.need(ShapeKey::I)?, inst.need(ShapeKey::I)?, "z"),
        // The remaining identities are infinite; their tails need |q| < 1
        // before the "eventually small" argument applies.
        C4_8 | HEINE | PFRAC | FINE | N2_16 => {
            if !is_inside_unit_disc(q) {
                return Ok(());
            }
            match inst.id {
                C4_8 => {
                    let k = inst.need(ShapeKey::K)?;
                    let z = sym(inst, Symbol::Z)?;
                    nonzero(z, "z")?;
                    shifted_to_infinity(z, q, -k, "z")?;
                    shifted_to_infinity(sym(inst, Symbol::T)?, q, 0, "t")
                }
                HEINE => shifted_to_infinity(sym(inst, Symbol::T)?, q, 0, "t"),
                PFRAC => shifted_to_infinity(sym(inst, Symbol::Y)?, q, 0, "y"),
                FINE => shifted_to_infinity(sym(inst, Symbol::Y)?, q, n()? + 1, "y"),
                N2_16 => {
                    // Only integral `a` can be checked exactly; q^a is
                    // irrational otherwise and no denominator can vanish.
                    let a = sym(inst, Symbol::A)?;
                    if !a.is_integer() {
                        return Ok(());
                    }
                    let a = i64::try_from(a.to_integer()).map_err(|_| Error::domain("a out of range"))?;
                    if a <= -1 {
                        return Err(Error::pole(format!("1 - q^(i+a) vanishes at i = {}", -a)));
                    }
                    shifted_to_infinity(sym(inst, Symbol::X)?, q, a, "x")
                }
                _ => unreachable!(),
            }
        }
    }
}
