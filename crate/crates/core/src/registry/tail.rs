//! Truncated series with rigorous remainder bounds for the resummation
//! identities L3.1, L3.2 and NB3.
//!
//! Everything is exact: the partial sum, the closed form and the bound are
//! rationals. The remainder is dominated term by term by a hypergeometric
//! majorant whose successive ratio decreases in `r`; majorant terms are
//! summed explicitly until that ratio drops below one, and the rest is
//! closed with a geometric series.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{int, ExactScalar, Field};
use crate::params::Symbol;
use crate::qcore::{h_range, q_pochhammer};

use super::instance::{IdentityInstance, ShapeKey};
use super::IdentityId;

pub const DEFAULT_TRUNCATION: u32 = 20;

/// Cap on explicitly summed majorant terms before the geometric closure.
const MAJORANT_STEPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TailEvaluation {
    /// Sum of the terms `r = 0..=R`.
    pub partial: ExactScalar,
    /// Closed form.
    pub rhs: ExactScalar,
    /// Upper bound on the omitted remainder `sum_{r > R}`.
    pub bound: ExactScalar,
    /// Majorant ratio at `r = 0`; the series is used only when this is below 1.
    pub rho: ExactScalar,
    pub terms: u32,
}

impl TailEvaluation {
    pub fn within_bound(&self) -> bool {
        (self.partial.clone() - self.rhs.clone()).abs() <= self.bound
    }
}

/// Binomial coefficient as a rational.
fn binom(n: i64, k: i64) -> ExactScalar {
    if k < 0 || k > n {
        return int(0);
    }
    let k = k.min(n - k);
    let mut acc = int(1);
    for j in 0..k {
        acc = acc * int(n - j) / int(j + 1);
    }
    acc
}

/// `h_0, ..., h_top` of `args` in one pass.
fn h_row(args: &[ExactScalar], top: usize) -> Vec<ExactScalar> {
    let mut row = vec![int(0); top + 1];
    row[0] = int(1);
    for a in args {
        for j in 1..=top {
            let prev = row[j - 1].clone();
            row[j] = row[j].clone() + a.clone() * prev;
        }
    }
    row
}

/// Remainder bound `sum_{r > R} c * ratio_prod`, where the majorant term at
/// `r` is `first(r)` and the ratio from `r` to `r + 1` is `ratio(r)`, which
/// must be non-increasing in `r`.
fn majorant_tail(
    start: i64,
    first: ExactScalar,
    ratio: impl Fn(i64) -> ExactScalar,
) -> Result<ExactScalar> {
    let one = int(1);
    let mut r = start;
    let mut term = first;
    let mut acc = int(0);
    for _ in 0..MAJORANT_STEPS {
        let rr = ratio(r);
        if rr < one {
            return Ok(acc + term / (one - rr));
        }
        acc += term.clone();
        term *= rr;
        r += 1;
    }
    Err(Error::convergence("majorant ratio did not drop below 1"))
}

/// Partial sum, closed form and remainder bound for a tail-bounded identity.
pub fn tail_sides(inst: &IdentityInstance) -> Result<TailEvaluation> {
    let r_max = i64::from(inst.trunc.unwrap_or(DEFAULT_TRUNCATION));
    let q = inst.env.require(Symbol::Q)?.clone();
    let z = inst.env.require(Symbol::Z)?.clone();
    match inst.id {
        IdentityId::L3_1 | IdentityId::L3_2 => binomial_tail(inst, &q, &z, r_max),
        IdentityId::NB3 => resummation(inst, &q, &z, r_max),
        other => Err(Error::schema(format!("{other} has no tail-bounded form"))),
    }
}

fn binomial_tail(inst: &IdentityInstance, q: &ExactScalar, z: &ExactScalar, r_max: i64) -> Result<TailEvaluation> {
    let i = inst.need(ShapeKey::I)?;
    let n = inst.need(ShapeKey::N)?;
    let k = inst.need(ShapeKey::K)?;
    let reciprocal = inst.id == IdentityId::L3_2;
    let one = int(1);

    let kernel: Vec<ExactScalar> = (i..=n)
        .map(|s| {
            let qs = q.powi(s)?;
            let den = one.clone() - qs.clone();
            if reciprocal { den.inv() } else { qs.div(&den) }
        })
        .collect::<Result<_>>()?;
    let step = if reciprocal { one.clone() - z.clone() } else { z.clone() - one.clone() };
    let big_a = kernel.iter().map(|a| a.abs()).max().expect("i <= n");
    let rho = (z.clone() - one.clone()).abs() * big_a.clone();
    if rho >= one {
        return Err(Error::domain(format!("ratio |z - 1| max|kernel| = {rho} is not below 1")));
    }

    let hs = h_row(&kernel, (k + r_max) as usize);
    let mut partial = int(0);
    let mut power = int(1);
    for r in 0..=r_max {
        partial += binom(k + r, k) * power.clone() * hs[(k + r) as usize].clone();
        power *= step.clone();
    }

    // |h_{k+r}| <= C(N+k+r-1, N-1) A^(k+r); combined with C(k+r, k) the
    // majorant ratio is rho (N + k + r) / (r + 1).
    let nn = n - i + 1;
    let start = r_max + 1;
    let first = binom(k + start, k) * binom(nn + k + start - 1, nn - 1) * big_a.powi(k)? * rho.powi(start)?;
    let bound = majorant_tail(start, first, |r| rho.clone() * int(nn + k + r) / int(r + 1))?;

    let qq = |m: i64| q_pochhammer(q, q, m as u32);
    let rhs = if reciprocal {
        let q_over_z = q.div(z)?;
        let h = h_range(k, i, n, |s| (z.clone() - q.powi(s)?).inv())?;
        let num = z.powi(i - n)? * (one.clone() - q.powi(i)?) * qq(n) * q_pochhammer(&q_over_z, q, i as u32);
        let den = (z.clone() - q.powi(i)?) * q_pochhammer(&q_over_z, q, n as u32) * qq(i);
        num.div(&den)? * h
    } else {
        let zq = z.clone() * q.clone();
        let h = h_range(k, i, n, |s| q.powi(s)?.div(&(one.clone() - z.clone() * q.powi(s)?)))?;
        let num = (one.clone() - q.powi(i)?) * qq(n) * q_pochhammer(&zq, q, i as u32);
        let den = (one.clone() - z.clone() * q.powi(i)?) * q_pochhammer(&zq, q, n as u32) * qq(i);
        num.div(&den)? * h
    };
    Ok(TailEvaluation { partial, rhs, bound, rho, terms: (r_max + 1) as u32 })
}

fn resummation(inst: &IdentityInstance, q: &ExactScalar, z: &ExactScalar, r_max: i64) -> Result<TailEvaluation> {
    let i = inst.need(ShapeKey::I)?;
    let l = inst.need(ShapeKey::L)?;
    let one = int(1);
    let qi = q.powi(i)?;
    let lam = qi.div(&(one.clone() - qi.clone()))?;
    let y = (z.clone() - one.clone()) * lam.clone();
    let rho = y.abs();
    if rho >= one {
        return Err(Error::domain(format!("ratio |z - 1| q^i/(1 - q^i) = {rho} is not below 1")));
    }
    let c = lam.powi(l)?;
    let mut partial = int(0);
    let mut power = int(1);
    for r in 0..=r_max {
        partial += binom(l - 1 + r, l - 1) * power.clone() * c.clone();
        power *= y.clone();
    }
    let start = r_max + 1;
    let first = binom(l - 1 + start, l - 1) * rho.powi(start)? * c.abs();
    let bound = majorant_tail(start, first, |r| rho.clone() * int(l + r) / int(r + 1))?;
    let den = one - z.clone() * qi.clone();
    if den.is_zero() {
        return Err(Error::pole("1 - z q^i = 0"));
    }
    let rhs = qi.powi(l)?.div(&den.powi(l)?)?;
    Ok(TailEvaluation { partial, rhs, bound, rho, terms: (r_max + 1) as u32 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(id: IdentityId, text: &str) -> TailEvaluation {
        tail_sides(&IdentityInstance::parse_assignments(id, text).unwrap()).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), int(10));
        assert_eq!(binom(7, 0), int(1));
        assert_eq!(binom(3, 4), int(0));
    }

    #[test]
    fn bounds_hold_and_shrink() {
        for (id, text) in [
            (IdentityId::L3_1, "i=2,n=4,k=2,z=6/5,q=1/3"),
            (IdentityId::L3_2, "i=1,n=3,k=1,z=9/10,q=1/3"),
            (IdentityId::NB3, "i=1,l=3,z=3/2,q=1/3"),
        ] {
            let mut last: Option<ExactScalar> = None;
            for r in [10, 20, 40] {
                let t = eval(id, &format!("{text},R={r}"));
                assert!(t.within_bound(), "{id} R={r}");
                assert!(t.bound > int(0));
                if let Some(prev) = &last {
                    assert!(t.bound < *prev);
                }
                last = Some(t.bound);
            }
        }
    }

    #[test]
    fn divergent_parameters_are_rejected() {
        let inst = IdentityInstance::parse_assignments(IdentityId::NB3, "i=1,l=1,z=5,q=1/2").unwrap();
        assert!(matches!(tail_sides(&inst), Err(Error::Domain(_))));
    }
}
