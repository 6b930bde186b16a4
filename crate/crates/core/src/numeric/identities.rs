//! Infinite identities evaluated at high precision.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::params::Symbol;
use crate::qcore::{choose2, sign};
use crate::registry::{IdentityId, IdentityInstance, Reading, ShapeKey};

use super::bigreal::BigReal;
use super::series::{qpoch_infinite_approx, sum_series_approx, Approx, NumericConfig};

/// Both sides of a numerically evaluated identity.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericEvaluation {
    pub lhs: Approx,
    pub rhs: Approx,
    /// Largest term count used by any truncated piece.
    pub k: usize,
    pub prec: usize,
}

impl NumericEvaluation {
    pub fn residual(&self) -> BigReal {
        (self.lhs.value.clone() - self.rhs.value.clone()).abs()
    }

    /// Combined truncation estimate of both sides.
    pub fn tail_bound(&self) -> BigReal {
        self.lhs.err.clone() + self.rhs.err.clone()
    }
}

pub(crate) struct Env<'a> {
    pub inst: &'a IdentityInstance,
    pub cfg: NumericConfig,
}

impl Env<'_> {
    pub fn get(&self, s: Symbol) -> Result<BigReal> {
        Ok(BigReal::from_rational(self.inst.env.require(s)?, self.cfg.prec))
    }

    pub fn c(&self, n: i64) -> BigReal {
        BigReal::from_i64(n, self.cfg.prec)
    }

    /// `q`, checked to lie in (0, 1).
    pub fn q(&self) -> Result<BigReal> {
        let q = self.get(Symbol::Q)?;
        if q.is_negative() || q.is_zero() || q >= self.c(1) {
            return Err(Error::domain(format!("numeric backend needs 0 < q < 1, got {}", q.to_decimal_digits(12))));
        }
        Ok(q)
    }
}

/// `(a; q)_0, ..., (a; q)_{len-1}`.
pub(crate) fn poch_table(a: &BigReal, q: &BigReal, len: usize) -> Vec<BigReal> {
    let mut out = Vec::with_capacity(len);
    let mut acc = a.one_like();
    let mut aq = a.clone();
    for _ in 0..len {
        out.push(acc.clone());
        acc = acc * (a.one_like() - aq.clone());
        aq = aq * q.clone();
    }
    out
}

fn inside(v: &BigReal, what: &str) -> Result<()> {
    if v.abs() >= v.one_like() {
        return Err(Error::domain(format!("|{what}| must be below 1 for convergence")));
    }
    Ok(())
}

/// Evaluate one of the numeric-only identities.
pub fn eval_numeric_identity(inst: &IdentityInstance, reading: Reading, cfg: &NumericConfig) -> Result<NumericEvaluation> {
    cfg.validate()?;
    inst.validate()?;
    crate::registry::check_poles(inst)?;
    let env = Env { inst, cfg: *cfg };
    let (lhs, rhs, k) = match inst.id {
        IdentityId::K1_2 => lambert(&env)?,
        IdentityId::HEINE => heine(&env)?,
        IdentityId::PFRAC => pfrac(&env)?,
        IdentityId::FINE => fine(&env)?,
        IdentityId::N2_16 => n2_16(&env, reading)?,
        IdentityId::C4_8 => c4_8(&env)?,
        other => return Err(Error::schema(format!("{other} is not a numeric identity"))),
    };
    Ok(NumericEvaluation { lhs, rhs, k, prec: cfg.prec })
}

type Sides = (Approx, Approx, usize);

fn lambert(env: &Env) -> Result<Sides> {
    let q = env.q()?;
    let one = env.c(1);
    let (l, kl) = sum_series_approx(&env.cfg, |k| {
        (1..=k as i64).map(|i| q.powi(i)?.div(&(one.clone() - q.powi(i)?))).collect()
    })?;
    let (r, kr) = sum_series_approx(&env.cfg, |k| {
        let qq = poch_table(&q, &q, k + 1);
        (1..=k as i64)
            .map(|r| {
                let num = env.c(sign(r - 1)) * q.powi(choose2(r + 1))?;
                num.div(&(qq[r as usize].clone() * (one.clone() - q.powi(r)?)))
            })
            .collect()
    })?;
    Ok((l, r, kl.max(kr)))
}

fn heine(env: &Env) -> Result<Sides> {
    let q = env.q()?;
    let a = env.get(Symbol::A)?;
    let t = env.get(Symbol::T)?;
    inside(&t, "t")?;
    let (l, k) = sum_series_approx(&env.cfg, |k| {
        let ap = poch_table(&a, &q, k);
        let qq = poch_table(&q, &q, k);
        (0..k).map(|j| Ok(ap[j].div(&qq[j])? * t.powi(j as i64)?)).collect()
    })?;
    let num = qpoch_infinite_approx(&(a * t.clone()), &q, env.cfg.prec)?;
    let den = qpoch_infinite_approx(&t, &q, env.cfg.prec)?;
    Ok((l, num.div(&den)?, k))
}

fn pfrac(env: &Env) -> Result<Sides> {
    let q = env.q()?;
    let y = env.get(Symbol::Y)?;
    let one = env.c(1);
    let (l, k) = sum_series_approx(&env.cfg, |k| {
        let qq = poch_table(&q, &q, k);
        (0..k as i64)
            .map(|j| {
                let num = env.c(sign(j)) * q.powi(choose2(j + 1))?;
                num.div(&(qq[j as usize].clone() * (one.clone() - y.clone() * q.powi(j)?)))
            })
            .collect()
    })?;
    let num = qpoch_infinite_approx(&q, &q, env.cfg.prec)?;
    let den = qpoch_infinite_approx(&y, &q, env.cfg.prec)?;
    Ok((l, num.div(&den)?, k))
}

fn fine(env: &Env) -> Result<Sides> {
    let q = env.q()?;
    let y = env.get(Symbol::Y)?;
    let n = env.inst.need(ShapeKey::N)?;
    let i = env.inst.need(ShapeKey::I)?;
    let yqi = y.clone() * q.powi(i)?;
    let yqn = y * q.powi(n + 1)?;
    let (l, k) = sum_series_approx(&env.cfg, |k| {
        let a = poch_table(&yqi, &q, k);
        let b = poch_table(&yqn, &q, k);
        let qq = poch_table(&q, &q, k);
        (0..k as i64)
            .map(|j| {
                let u = j as usize;
                let num = env.c(sign(j)) * q.powi(choose2(j + 1) + (n - i) * j)? * a[u].clone();
                num.div(&(qq[u].clone() * b[u].clone()))
            })
            .collect()
    })?;
    let num = qpoch_infinite_approx(&q.powi(n - i + 1)?, &q, env.cfg.prec)?;
    let den = qpoch_infinite_approx(&yqn, &q, env.cfg.prec)?;
    Ok((l, num.div(&den)?, k))
}

fn n2_16(env: &Env, reading: Reading) -> Result<Sides> {
    let q = env.q()?;
    let x = env.get(Symbol::X)?;
    let a = env.get(Symbol::A)?;
    let qa = q.pow_real(&a)?;
    n2_16_sides(env, &q, &x, &qa, reading)
}

/// Sides of the non-integer-`a` identity given `q^a`; shared with the probe.
pub(crate) fn n2_16_sides(env: &Env, q: &BigReal, x: &BigReal, qa: &BigReal, reading: Reading) -> Result<Sides> {
    let one = env.c(1);
    let cfg = &env.cfg;
    let (lhs, k0) = sum_series_approx(cfg, |k| {
        let qq = poch_table(q, q, k + 1);
        let mut out = Vec::with_capacity(k);
        let mut falling = one.clone();
        for i in 1..=k as i64 {
            // prod_{j < i} (1 - q^(a - j)).
            falling = falling * (one.clone() - qa.clone() * q.powi(-(i - 1))?);
            let s = match reading {
                Reading::Corrected => env.c(sign(i - 1)),
                Reading::Printed => one.clone(),
            };
            let num = s * falling.clone() * q.powi((i * i + 3 * i) / 2)? * (one.clone() - x.powi(i)?);
            let den = qq[i as usize].clone() * (one.clone() - q.powi(i)?).powi(2)?;
            out.push(num.div(&den)?);
        }
        Ok(out)
    })?;

    let lam = |i: i64| -> Result<BigReal> { q.powi(i)?.div(&(one.clone() - q.powi(i)?)) };
    let (big_a, k1) = sum_series_approx(cfg, |k| {
        let xp = poch_table(x, q, k + 1);
        let mut inner = one.zero_like();
        let mut out = Vec::with_capacity(k);
        for i in 1..=k as i64 {
            inner = inner + lam(i)? * xp[i as usize].clone();
            out.push(lam(i)? * inner.clone());
        }
        Ok(out)
    })?;
    let shifted = |i: i64| -> Result<BigReal> {
        let v = q.powi(i)? * qa.clone();
        v.div(&(one.clone() - v.clone()))
    };
    let (big_b, k2) = sum_series_approx(cfg, |k| (1..=k as i64).map(shifted).collect())?;
    let (big_c, k3) = sum_series_approx(cfg, |k| {
        let xp = poch_table(x, q, k + 1);
        (1..=k as i64).map(|i| Ok(lam(i)? * xp[i as usize].clone())).collect()
    })?;
    let xqa = x.clone() * qa.clone();
    let (dsum, k4) = sum_series_approx(cfg, |k| {
        let xp = poch_table(&xqa, q, k + 2);
        let mut prefix = q.div(&(one.clone() - q.clone() * qa.clone()))?;
        let mut out = Vec::with_capacity(k);
        for s in 2..=(k as i64 + 1) {
            let den = one.clone() - q.powi(s)? * qa.clone();
            let head = q.powi(s)? * qa.clone() * qa.clone() * xp[s as usize].clone();
            out.push(head.div(&den)? * prefix.clone());
            prefix = prefix + q.powi(s)?.div(&den)?;
        }
        Ok(out)
    })?;
    let pref = qpoch_infinite_approx(x, q, cfg.prec)?.div(&qpoch_infinite_approx(&xqa, q, cfg.prec)?)?;
    let rhs = big_a.sub(&big_b.mul(&big_c)).add(&pref.mul(&dsum));
    Ok((lhs, rhs, [k0, k1, k2, k3, k4].into_iter().max().unwrap()))
}

fn c4_8(env: &Env) -> Result<Sides> {
    let q = env.q()?;
    let z = env.get(Symbol::Z)?;
    let t = env.get(Symbol::T)?;
    let depth = env.inst.need(ShapeKey::K)?;
    inside(&z, "z")?;
    inside(&t, "t")?;
    let one = env.c(1);
    let (lhs, kl) = sum_series_approx(&env.cfg, |k| {
        // cur[i - 1]: value of the remaining levels with previous index i.
        let mut cur = Vec::with_capacity(k);
        let mut acc = one.zero_like();
        for r in 1..=k as i64 {
            let a = (one.clone() - z.clone() * q.powi(r - depth - 1)?).inv()?;
            let b = (one.clone() - t.clone() * q.powi(r - 1)?).inv()?;
            acc = acc + a - b;
            cur.push(acc.clone());
        }
        for j in (1..=depth).rev() {
            let mut acc = one.zero_like();
            for i in 1..=k as i64 {
                let w = q.powi(i)?.div(&((one.clone() - q.powi(i)?) * (one.clone() - z.clone() * q.powi(i - j)?)))?;
                acc = acc + w * cur[(i - 1) as usize].clone();
                cur[(i - 1) as usize] = acc.clone();
            }
        }
        let mut prev = one.zero_like();
        Ok(cur
            .into_iter()
            .map(|v| {
                let d = v.clone() - prev.clone();
                prev = v;
                d
            })
            .collect())
    })?;
    let tqz = t.clone() * q.powi(depth)?.div(&z)?;
    let (sum, kr) = sum_series_approx(&env.cfg, |k| {
        let a = poch_table(&tqz, &q, k + 1);
        let b = poch_table(&t, &q, k + 1);
        (1..=k as i64)
            .map(|r| {
                let u = r as usize;
                let num = a[u].clone() * z.powi(r)?;
                num.div(&(b[u].clone() * (one.clone() - q.powi(r)?).powi(depth + 1)?))
            })
            .collect()
    })?;
    let zk = z * q.powi(-depth)?;
    let pre = poch_table(&zk, &q, depth as usize + 1).pop().expect("non-empty");
    let rhs = sum.div(&Approx::exact(pre))?;
    Ok((lhs, rhs, kl.max(kr)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(id: IdentityId, text: &str) -> NumericEvaluation {
        let inst = IdentityInstance::parse_assignments(id, text).unwrap();
        eval_numeric_identity(&inst, Reading::Corrected, &NumericConfig::default()).unwrap()
    }

    #[test]
    fn heine_trivial_point() {
        let e = run(IdentityId::HEINE, "a=0,q=1/2,t=0");
        assert_eq!(e.lhs.value, BigReal::one(192));
        assert_eq!(e.rhs.value, BigReal::one(192));
    }

    #[test]
    fn lambert_value() {
        let e = run(IdentityId::K1_2, "q=1/2");
        assert!(e.residual().to_f64() < 1e-30);
        assert!((e.lhs.value.to_f64() - 1.606_695_152_415_291_8).abs() < 1e-15);
    }

    #[test]
    fn negative_q_is_a_domain_error() {
        let inst = IdentityInstance::parse_assignments(IdentityId::K1_2, "q=-1/2").unwrap();
        let e = eval_numeric_identity(&inst, Reading::Corrected, &NumericConfig::default()).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn printed_sign_fails() {
        let inst = IdentityInstance::parse_assignments(IdentityId::N2_16, "a=1/2,q=2/5,x=1/3").unwrap();
        let e = eval_numeric_identity(&inst, Reading::Printed, &NumericConfig::default()).unwrap();
        assert!(e.residual().to_f64() > 1e-6);
    }
}
