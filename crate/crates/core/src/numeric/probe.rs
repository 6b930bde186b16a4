//! Continuation of the finite identities PB1.11 and PC1.12 to real `n`.
//!
//! A length-`n` sum is read as `sum_{u>=1} (a(u) - a(u + n)) + n lim a`, and
//! `(x; q)_n` as `(x; q)_inf / (x q^n; q)_inf`. The limit term makes the
//! continuation agree with the finite sum at integral `n` when the summand
//! does not vanish at infinity.
//!
//! Nested sums are handled level by level: every bound that appears is
//! either an integer or `n + v` for an integer `v`, so each level is
//! tabulated on both lattices.

use crate::error::{Error, Result};
use crate::field::{ExactScalar, Field};
use crate::params::Symbol;
use crate::qcore::{choose2, sign};
use crate::registry::{IdentityId, IdentityInstance, Reading, ShapeKey};

use super::bigreal::BigReal;
use super::identities::{eval_numeric_identity, poch_table, NumericEvaluation};
use super::series::{qpoch_real_order, sum_series, sum_series_approx, Approx, NumericConfig};

/// Summation index: `v` on the integer lattice, or `n + v`.
#[derive(Debug, Clone, Copy)]
struct Ix {
    v: i64,
    shifted: bool,
}

impl Ix {
    fn int(v: i64) -> Self {
        Ix { v, shifted: false }
    }

    fn shift(v: i64) -> Self {
        Ix { v, shifted: true }
    }
}

/// Powers `b^i` for `i` on either lattice.
struct Power {
    b: BigReal,
    b_n: BigReal,
}

impl Power {
    fn new(b: &BigReal, n: &BigReal) -> Result<Self> {
        Ok(Power { b: b.clone(), b_n: b.pow_real(n)? })
    }

    fn at(&self, ix: Ix) -> Result<BigReal> {
        let p = self.b.powi(ix.v)?;
        Ok(if ix.shifted { self.b_n.clone() * p } else { p })
    }
}

/// `(a; q)_i` for `i` on either lattice, via `(a; q)_{n+v} = (a; q)_n (a q^n; q)_v`.
struct Poch {
    a: BigReal,
    a_n: BigReal,
    a_qn: BigReal,
    q: BigReal,
}

impl Poch {
    fn new(a: &BigReal, q: &BigReal, n: &BigReal, qn: &BigReal, prec: usize) -> Result<Self> {
        let a_n = qpoch_real_order(a, q, n, prec)?.value;
        Ok(Poch { a: a.clone(), a_n, a_qn: a.clone() * qn.clone(), q: q.clone() })
    }

    fn finite(a: &BigReal, q: &BigReal, v: i64) -> BigReal {
        poch_table(a, q, v as usize + 1).pop().expect("non-empty")
    }

    fn at(&self, ix: Ix) -> BigReal {
        if ix.shifted {
            self.a_n.clone() * Self::finite(&self.a_qn, &self.q, ix.v)
        } else {
            Self::finite(&self.a, &self.q, ix.v)
        }
    }
}

type Weight<'a> = Box<dyn Fn(Ix) -> Result<BigReal> + 'a>;

/// Terms whose sum is the chain `n >= i_1 >= ... >= i_L >= 1` of
/// `prod_j w_j(i_j) * terminal(i_L)` continued to real `n`, truncated at `k`.
/// Weights depend on their own index only.
fn lattice_chain(levels: &[Weight<'_>], terminal: &Weight<'_>, n: &BigReal, k: usize) -> Result<Vec<BigReal>> {
    let k = k as i64;
    // Integer lattice: value of the remaining levels given the previous index p.
    let mut int_tables: Vec<Vec<BigReal>> = vec![(1..=k).map(|p| terminal(Ix::int(p))).collect::<Result<_>>()?];
    for w in levels.iter().rev() {
        let inner = int_tables.last().expect("seeded");
        let mut acc = n.zero_like();
        let mut row = Vec::with_capacity(k as usize);
        for i in 1..=k {
            acc = acc + w(Ix::int(i))? * inner[(i - 1) as usize].clone();
            row.push(acc.clone());
        }
        int_tables.push(row);
    }
    // Shifted lattice, indices v = 0..=k for bounds n + v.
    let mut shifted: Vec<BigReal> = (0..=k).map(|v| terminal(Ix::shift(v))).collect::<Result<_>>()?;
    let mut top_terms = Vec::new();
    for (depth, w) in levels.iter().enumerate().rev() {
        let below_int = &int_tables[levels.len() - 1 - depth];
        let mut terms = Vec::with_capacity(k as usize);
        let mut c = Vec::with_capacity(k as usize);
        for u in 1..=k {
            let b = w(Ix::int(u))? * below_int[(u - 1) as usize].clone();
            let cu = w(Ix::shift(u))? * shifted[u as usize].clone();
            terms.push(b.clone() - cu.clone());
            c.push(cu);
        }
        let limit = w(Ix::int(k))? * below_int[(k - 1) as usize].clone();
        terms[0] = terms[0].clone() + n.clone() * limit;
        let base = terms.iter().fold(n.zero_like(), |acc, t| acc + t.clone());
        let mut next = Vec::with_capacity(k as usize + 1);
        let mut acc = base;
        next.push(acc.clone());
        for cu in c {
            acc = acc + cu;
            next.push(acc.clone());
        }
        shifted = next;
        top_terms = terms;
    }
    if levels.is_empty() {
        return Err(Error::schema("lattice chain needs at least one level"));
    }
    Ok(top_terms)
}

/// Every level of a lattice chain is truncated at the same `k`, so the
/// ratio test on the top level alone misses the inner truncation error.
/// The value at `k` is accepted once it differs from the value at `k/2` by
/// at most the tolerance; that difference is added to the error.
fn chain_series(cfg: &NumericConfig, mut terms: impl FnMut(usize) -> Result<Vec<BigReal>>) -> Result<(Approx, usize)> {
    let fixed = |k: usize| NumericConfig { k, auto_extend: false, ..*cfg };
    let settle = |cur: Approx, prev: &Approx| {
        let moved = (cur.value.clone() - prev.value.clone()).abs();
        (moved.to_f64(), Approx::new(cur.value.clone(), cur.err.clone() + moved))
    };
    if !cfg.auto_extend {
        let (cur, k) = sum_series_approx(cfg, &mut terms)?;
        let (prev, _) = sum_series_approx(&fixed((k / 2).max(9)), &mut terms)?;
        return Ok((settle(cur, &prev).1, k));
    }
    // Double K until two successive truncations agree; a ratio test that has
    // not settled yet just means K is still too small.
    let mut k = cfg.k.max(9);
    let mut prev: Option<Approx> = None;
    let mut last_moved = f64::INFINITY;
    loop {
        match sum_series_approx(&fixed(k), &mut terms) {
            Ok((cur, _)) => {
                if let Some(p) = &prev {
                    let (moved, out) = settle(cur.clone(), p);
                    if moved <= cfg.tol && out.err.to_f64() <= cfg.tol {
                        return Ok((out, k));
                    }
                    last_moved = moved;
                }
                prev = Some(cur);
            }
            Err(Error::Convergence(_)) => prev = None,
            Err(e) => return Err(e),
        }
        if k >= cfg.k_max {
            return Err(Error::convergence(format!("nested truncation still moving by {last_moved:.1e} at {k} terms")));
        }
        k = (2 * k).min(cfg.k_max);
    }
}

struct Ctx {
    q: BigReal,
    n: BigReal,
    /// `n` when it is integral, to keep vanishing binomial factors exact.
    n_int: Option<i64>,
    qn: BigReal,
    prec: usize,
}

impl Ctx {
    fn c(&self, v: i64) -> BigReal {
        BigReal::from_i64(v, self.prec)
    }

    /// `prod_{j<i} (1 - q^(n-j)) / (q; q)_i`.
    fn gauss_real(&self, i: i64, qq: &[BigReal]) -> Result<BigReal> {
        let one = self.c(1);
        let mut acc = one.clone();
        for j in 0..i {
            let p = match self.n_int {
                Some(m) => self.q.powi(m - j)?,
                None => self.qn.clone() * self.q.powi(-j)?,
            };
            acc = acc * (one.clone() - p);
        }
        acc.div(&qq[i as usize])
    }
}

/// Evaluate the continuation of `inst` at `n = a`. `inst` supplies every
/// parameter other than `n`.
pub fn probe_noninteger(inst: &IdentityInstance, a: &ExactScalar, cfg: &NumericConfig) -> Result<NumericEvaluation> {
    cfg.validate()?;
    match inst.id {
        IdentityId::N2_16 => {
            let mut inst = inst.clone();
            inst.env.set(Symbol::A, a.clone());
            eval_numeric_identity(&inst, Reading::Corrected, cfg)
        }
        IdentityId::PB1_11 | IdentityId::PC1_12 => {
            let prec = cfg.prec;
            let q = BigReal::from_rational(inst.env.require(Symbol::Q)?, prec);
            if q.is_negative() || q.is_zero() || q >= q.one_like() {
                return Err(Error::domain("probe needs 0 < q < 1"));
            }
            let n = BigReal::from_rational(a, prec);
            if n.is_negative() {
                return Err(Error::domain("probe needs a >= 0"));
            }
            let n_int = n.as_integer();
            let qn = q.pow_real(&n)?;
            let ctx = Ctx { q, n, n_int, qn, prec };
            if inst.id == IdentityId::PB1_11 {
                pb1_11(inst, &ctx, cfg)
            } else {
                pc1_12(inst, &ctx, cfg)
            }
        }
        other => Err(Error::schema(format!("{other} has no real-n continuation"))),
    }
}

fn real(inst: &IdentityInstance, s: Symbol, prec: usize) -> Result<BigReal> {
    Ok(BigReal::from_rational(inst.env.require(s)?, prec))
}

fn pb1_11(inst: &IdentityInstance, cx: &Ctx, cfg: &NumericConfig) -> Result<NumericEvaluation> {
    let ls = inst.l_vec()?.to_vec();
    let zs: Vec<BigReal> =
        inst.env.z_vec.iter().flatten().map(|z| BigReal::from_rational(z, cx.prec)).collect();
    let k = ls.len();
    if k == 0 || zs.len() != k || ls.contains(&0) {
        return Err(Error::schema("lv and zv must have equal positive length with entries >= 1"));
    }
    if zs.iter().any(|z| z.is_zero()) {
        return Err(Error::pole("z_j = 0"));
    }
    let x = real(inst, Symbol::X, cx.prec)?;
    let (q, n, qn) = (&cx.q, &cx.n, &cx.qn);
    let one = cx.c(1);
    let qpow = Power::new(q, n)?;
    let xpow = Power::new(&x, n)?;
    let zpow: Vec<Power> = zs.iter().map(|z| Power::new(z, n)).collect::<Result<_>>()?;
    let zinv: Vec<Power> = zs.iter().map(|z| Power::new(&z.inv()?, n)).collect::<Result<_>>()?;
    let qz: Vec<Poch> = zs.iter().map(|z| Poch::new(&q.div(z)?, q, n, qn, cx.prec)).collect::<Result<_>>()?;
    let qq = Poch::new(q, q, n, qn, cx.prec)?;

    let mut levels: Vec<Weight> = Vec::new();
    for j in 0..k {
        let zj = zs[j].clone();
        let qpow = &qpow;
        for _ in 1..ls[j] {
            let zj = zj.clone();
            levels.push(Box::new(move |ix| (zj.clone() - qpow.at(ix)?).inv()));
        }
        let (zpow, zinv, qz, one) = (&zpow, &zinv, &qz, one.clone());
        levels.push(Box::new(move |ix| {
            let qi = qpow.at(ix)?;
            let mut w = (zj.clone() - qi.clone()).inv()?;
            if j + 1 < k {
                let num = qi.clone() * zpow[j].at(ix)? * zinv[j + 1].at(ix)? * qz[j].at(ix);
                let den = (one.clone() - qi) * qz[j + 1].at(ix);
                w = w * num.div(&den)?;
            }
            Ok(w)
        }));
    }
    let terminal: Weight = Box::new(|ix| {
        let num = (one.clone() - xpow.at(ix)?) * zpow[k - 1].at(ix)? * qz[k - 1].at(ix);
        num.div(&qq.at(ix))
    });
    let (lhs, kl) = chain_series(cfg, |kk| lattice_chain(&levels, &terminal, n, kk))?;

    // Right side: sum over i >= 1 with the real-n binomial.
    let z1 = zs[0].clone();
    let l1 = i64::from(ls[0]);
    let (rsum, kr) = sum_series_approx(cfg, |kk| {
        let qqt = poch_table(q, q, kk + 1);
        let xp = poch_table(&x, q, kk + 1);
        // Inner chains for every top i, integer lattice only.
        let mut inner: Vec<BigReal> = xp[1..].to_vec();
        for j in (1..k).rev() {
            let lj = i64::from(ls[j]);
            let mut acc = one.zero_like();
            for i in 1..=kk as i64 {
                let qi = q.powi(i)?;
                let w = qi.clone().div(&((one.clone() - qi.clone()) * (zs[j].clone() - qi).powi(lj)?))?;
                acc = acc + w * inner[(i - 1) as usize].clone();
                inner[(i - 1) as usize] = acc.clone();
            }
        }
        (1..=kk as i64)
            .map(|i| {
                let g = cx.gauss_real(i, &qqt)?;
                let num = g * cx.c(sign(i - 1)) * q.powi(choose2(i + 1))? * qn.powi(-i)? * inner[(i - 1) as usize].clone();
                num.div(&(z1.clone() - q.powi(i)?).powi(l1)?)
            })
            .collect()
    })?;
    let pre = Approx::exact(zpow[0].b_n.clone())
        .mul(&qpoch_real_order(&q.div(&z1)?, q, n, cx.prec)?)
        .div(&qpoch_real_order(q, q, n, cx.prec)?)?;
    let rhs = pre.mul(&rsum);
    Ok(NumericEvaluation { lhs, rhs, k: kl.max(kr), prec: cx.prec })
}

fn pc1_12(inst: &IdentityInstance, cx: &Ctx, cfg: &NumericConfig) -> Result<NumericEvaluation> {
    let depth = inst.need(ShapeKey::K)?;
    if depth < 1 {
        return Err(Error::schema("k must be at least 1"));
    }
    let z = real(inst, Symbol::Z, cx.prec)?;
    let t = real(inst, Symbol::T, cx.prec)?;
    if z.is_zero() {
        return Err(Error::pole("z = 0"));
    }
    let (q, n, qn) = (&cx.q, &cx.n, &cx.qn);
    let one = cx.c(1);
    let qpow = Power::new(q, n)?;

    let mut levels: Vec<Weight> = Vec::new();
    for j in 1..=depth {
        let (z, qpow, one) = (z.clone(), &qpow, one.clone());
        levels.push(Box::new(move |ix| {
            let qi = qpow.at(ix)?;
            let den = (one.clone() - qi.clone()) * (one.clone() - z.clone() * qi.clone() * q.powi(-j)?);
            qi.div(&den)
        }));
    }
    {
        let (z, t, qpow, one) = (z.clone(), t.clone(), &qpow, one.clone());
        levels.push(Box::new(move |ix| {
            let qr = qpow.at(ix)?;
            let a = (one.clone() - z.clone() * qr.clone() * q.powi(-depth - 1)?).inv()?;
            let b = (one.clone() - t.clone() * qr * q.powi(-1)?).inv()?;
            Ok(a - b)
        }));
    }
    let terminal: Weight = Box::new(|_| Ok(one.clone()));
    let (lhs, kl) = chain_series(cfg, |kk| lattice_chain(&levels, &terminal, n, kk))?;

    let tqz = t.clone() * q.powi(depth)?.div(&z)?;
    let zk = poch_table(&(z.clone() * q.powi(-depth)?), q, depth as usize + 1).pop().expect("non-empty");
    let (rsum, kr) = sum_series_approx(cfg, |kk| {
        let qqt = poch_table(q, q, kk + 1);
        let a = poch_table(&tqz, q, kk + 1);
        let b = poch_table(&t, q, kk + 1);
        (1..=kk as i64)
            .map(|r| {
                let u = r as usize;
                let g = cx.gauss_real(r, &qqt)?;
                // (z; q)_{n-r} / (z; q)_n = 1 / (z q^(n-r); q)_r.
                let shifted = z.clone() * qn.clone() * q.powi(-r)?;
                let zr = poch_table(&shifted, q, u + 1).pop().expect("non-empty");
                let num = g * qqt[u - 1].clone() * a[u].clone() * z.powi(r)?;
                let den = zr * zk.clone() * b[u].clone() * (one.clone() - q.powi(r)?).powi(depth)?;
                num.div(&den)
            })
            .collect()
    })?;
    Ok(NumericEvaluation { lhs, rhs: rsum, k: kl.max(kr), prec: cx.prec })
}

/// Terms of a plain length-`n` sum continued to real `n`; used by tests.
#[allow(dead_code)]
fn shifted_total(w: &Weight<'_>, n: &BigReal, cfg: &NumericConfig) -> Result<BigReal> {
    let one: Weight = Box::new(|_| Ok(n.one_like()));
    let levels = [Box::new(w) as Weight];
    Ok(sum_series(cfg, |k| lattice_chain(&levels, &one, n, k))?.0)
}
