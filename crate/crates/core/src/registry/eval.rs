//! Left and right evaluators for the finite identities.
//!
//! Each side is transcribed independently from its display; nothing on one
//! side is derived from the other. All evaluators are generic over
//! [`Field`] so the numeric backend reuses them verbatim.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::params::{ParamEnv, Symbol};
use crate::qcore::{choose2, gauss_binomial, h_range_in, q_number, q_pochhammer};

use super::errata::{Errata, Notation, Reading};
use super::instance::{IdentityInstance, ShapeKey};
use super::nested::{chain_sum, ChainOrder, Level};
use super::{entry_for, Backend, IdentityId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EvalOptions {
    pub reading: Reading,
    pub order: ChainOrder,
}

/// Parameter values lifted into a concrete field.
#[derive(Debug, Clone)]
pub struct Vals<F> {
    unit: F,
    scalars: BTreeMap<Symbol, F>,
    zs: Vec<F>,
}

impl<F: Field> Vals<F> {
    /// `unit` fixes the representation (and, for reals, the precision).
    pub fn from_env(unit: &F, env: &ParamEnv) -> Self {
        Vals {
            unit: unit.one_like(),
            scalars: env.iter().map(|(s, v)| (s, unit.from_exact(v))).collect(),
            zs: env.z_vec.iter().flatten().map(|v| unit.from_exact(v)).collect(),
        }
    }

    /// Override one parameter, e.g. with a value from a different field
    /// embedding than the rest.
    pub fn set(&mut self, sym: Symbol, value: F) {
        self.scalars.insert(sym, value);
    }

    pub fn get(&self, sym: Symbol) -> Result<F> {
        self.scalars.get(&sym).cloned().ok_or_else(|| Error::schema(format!("missing parameter `{sym}`")))
    }

    pub fn z_vec(&self) -> &[F] {
        &self.zs
    }

    pub fn unit(&self) -> &F {
        &self.unit
    }
}

struct Cx<'a, F> {
    q: F,
    one: F,
    vals: &'a Vals<F>,
    notation: Notation,
    reading: Reading,
    order: ChainOrder,
}

type Term<'a, F> = Box<dyn Fn(i64) -> Result<F> + 'a>;

impl<'a, F: Field> Cx<'a, F> {
    fn c(&self, n: i64) -> F {
        self.one.lift(n)
    }

    fn get(&self, s: Symbol) -> Result<F> {
        self.vals.get(s)
    }

    fn zs(&self) -> &[F] {
        self.vals.z_vec()
    }

    fn qp(&self, e: i64) -> Result<F> {
        self.q.powi(e)
    }

    fn poch(&self, a: &F, n: i64) -> Result<F> {
        let n = u32::try_from(n).map_err(|_| Error::schema(format!("q-Pochhammer of negative order {n}")))?;
        Ok(q_pochhammer(a, &self.q, n))
    }

    /// `(q; q)_n`.
    fn qq(&self, n: i64) -> Result<F> {
        self.poch(&self.q, n)
    }

    fn gb(&self, n: i64, r: i64) -> Result<F> {
        if r < 0 || r > n {
            return Ok(self.c(0));
        }
        gauss_binomial(n as u32, r as u32, &self.q)
    }

    /// The bracket coefficient in front of an alternating inversion sum,
    /// honouring a printed reading where one is on record.
    fn bracket(&self, n: i64, i: i64) -> Result<F> {
        match self.notation {
            Notation::Gauss => self.gb(n, i),
            Notation::QNumber => q_number(n as u32, &self.q),
            Notation::QNumberProduct => Ok(q_number(n as u32, &self.q)? * q_number(i as u32, &self.q)?),
        }
    }

    fn sgn(&self, e: i64) -> F {
        self.c(crate::qcore::sign(e))
    }

    /// `1 - q^e`.
    fn omq(&self, e: i64) -> Result<F> {
        Ok(self.one.clone() - self.qp(e)?)
    }

    /// `1 - a q^e`.
    fn om(&self, a: &F, e: i64) -> Result<F> {
        Ok(self.one.clone() - a.clone() * self.qp(e)?)
    }

    fn sum(&self, lo: i64, hi: i64, mut f: impl FnMut(i64) -> Result<F>) -> Result<F> {
        let mut acc = self.c(0);
        for i in lo..=hi {
            acc = acc + f(i)?;
        }
        Ok(acc)
    }

    fn h(&self, k: i64, lo: i64, hi: i64, kernel: impl FnMut(i64) -> Result<F>) -> Result<F> {
        h_range_in(&self.one, k, lo, hi, kernel)
    }

    fn chain(&self, top: i64, levels: &[Level<'_, F>], terminal: &dyn Fn(i64) -> Result<F>) -> Result<F> {
        chain_sum(&self.one, top, levels, terminal, self.order)
    }

    /// `q^s / (1 - q^s)`.
    fn lambert(&self, s: i64) -> Result<F> {
        self.qp(s)?.div(&self.omq(s)?)
    }
}

fn d<F: Field>(a: F, b: F) -> Result<F> {
    a.div(&b)
}

/// Evaluate one side of a finite identity.
pub fn eval_side<F: Field>(
    inst: &IdentityInstance,
    side: Side,
    vals: &Vals<F>,
    opts: EvalOptions,
) -> Result<F> {
    let entry = entry_for(inst.id);
    if entry.backend != Backend::Exact {
        return Err(Error::schema(format!("{} is not a finite identity ({})", inst.id, entry.backend.as_str())));
    }
    let cx = Cx {
        q: vals.get(Symbol::Q)?,
        one: vals.unit().clone(),
        vals,
        notation: Errata::bundled().notation(inst.id, opts.reading),
        reading: opts.reading,
        order: opts.order,
    };
    use IdentityId::*;
    match inst.id {
        D1_1 => d1_1(&cx, inst, side),
        P1_3 => p1_3(&cx, inst, side),
        FL1_4 => fl1_4(&cx, inst, side),
        Z1_5 => z1_5(&cx, inst, side),
        GZ1_6 => gz1_6(&cx, inst, side),
        TA1_8 => ta1_8(&cx, inst, side),
        TA1_9 => ta1_9(&cx, inst, side),
        C2_14 => c2_14(&cx, inst, side),
        C2_15 => c2_15(&cx, inst, side),
        PB1_10 => pb1_10(&cx, inst, side),
        PB1_11 => pb1_11(&cx, inst, side),
        C3_3 => c3_3(&cx, inst, side),
        C3_4 => c3_4(&cx, inst, side),
        FL3_5 => fl3_5(&cx, inst, side),
        P3_6 => p3_6(&cx, inst, side),
        A3_7 => a3_7(&cx, inst, side),
        A3_8 => a3_8(&cx, inst, side),
        A3_9 => a3_9(&cx, inst, side),
        C3_10 => c3_10(&cx, inst, side),
        P4_1 => p4_1(&cx, inst, side),
        S4_2 | S4_3 | S4_4 => s4(&cx, inst, side),
        S4_5 => s4_5(&cx, inst, side),
        E4_7 => e4_7(&cx, inst, side),
        PC1_12 => pc1_12(&cx, inst, side),
        K1_2 | N2_16 | C4_8 | HEINE | PFRAC | FINE | L3_1 | L3_2 | NB3 => unreachable!("filtered by backend"),
    }
}

/// Both sides, left first.
pub fn eval_pair<F: Field>(inst: &IdentityInstance, vals: &Vals<F>, opts: EvalOptions) -> Result<(F, F)> {
    Ok((eval_side(inst, Side::Left, vals, opts)?, eval_side(inst, Side::Right, vals, opts)?))
}

fn d1_1<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let m = inst.need(ShapeKey::M)?;
    match side {
        Side::Left => {
            let levels: Vec<_> = (0..m).map(|_| Level::free(|i, _| cx.lambert(i))).collect();
            cx.chain(n, &levels, &|_| Ok(cx.c(1)))
        }
        Side::Right => cx.sum(1, n, |r| {
            d(cx.gb(n, r)? * cx.sgn(r - 1) * cx.qp(choose2(r) + m * r)?, cx.omq(r)?.powi(m)?)
        }),
    }
}

fn p1_3<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let m = inst.need(ShapeKey::M)?;
    match side {
        Side::Left => cx.sum(1, n, |i| d(cx.qp(i * (m - 1))?, cx.omq(i)?.powi(m)?)),
        Side::Right => {
            // The first index is pinned to r.
            let mut levels = vec![Level::pinned(|p| cx.lambert(p))];
            levels.extend((1..m).map(|_| Level::free(|i, _| cx.lambert(i))));
            cx.sum(1, n, |r| {
                let inner = cx.chain(r, &levels, &|_| Ok(cx.c(1)))?;
                Ok(cx.gb(n, r)? * cx.sgn(r - 1) * cx.qp(choose2(r) - r * n)? * inner)
            })
        }
    }
}

fn fl1_4<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let m = inst.need(ShapeKey::M)?;
    let x = cx.get(Symbol::X)?;
    match side {
        Side::Left => {
            let levels: Vec<_> = (0..m).map(|_| Level::free(|i, _| cx.lambert(i))).collect();
            cx.chain(n, &levels, &|i| Ok(cx.sgn(i - 1) * (x.powi(i)? - cx.sgn(i))))
        }
        Side::Right => {
            let minus_inv = -x.inv()?;
            cx.sum(1, n, |r| {
                let num = cx.gb(n, r)? * cx.sgn(r - 1) * x.powi(r)? * cx.poch(&minus_inv, r)? * cx.qp(m * r)?;
                d(num, cx.omq(r)?.powi(m)?)
            })
        }
    }
}

fn z1_5<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let m = inst.need(ShapeKey::M)?;
    let x = cx.get(Symbol::X)?;
    let z = cx.get(Symbol::Z)?;
    let zq = z.clone() * cx.q.clone();
    match side {
        Side::Left => {
            let levels: Vec<_> = (0..m).map(|_| Level::free(|i, _| d(cx.qp(i)?, cx.om(&z, i)?))).collect();
            let inner = cx.chain(n, &levels, &|i| d(x.powi(i)? * cx.poch(&zq, i)?, cx.qq(i)?))?;
            d(cx.qq(n)? * inner, cx.poch(&zq, n)?)
        }
        Side::Right => {
            let inv = x.inv()?;
            cx.sum(1, n, |r| {
                let head = x.powi(r)? * cx.poch(&inv, r)? + cx.sgn(r - 1) * cx.qp(choose2(r))?;
                d(cx.gb(n, r)? * head * cx.qp(m * r)?, cx.om(&z, r)?.powi(m)?)
            })
        }
    }
}

/// Levels `j = 1..=count` with weight `q^i / ((1 - q^i)(1 - z q^(i-j)))`.
fn shifted_z_levels<'a, F: Field>(cx: &'a Cx<'a, F>, z: &'a F, count: i64) -> Vec<Level<'a, F>> {
    (1..=count)
        .map(|j| Level::free(move |i, _| d(cx.qp(i)?, cx.omq(i)? * cx.om(z, i - j)?)))
        .collect()
}

fn gz1_6<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let m = inst.need(ShapeKey::M)?;
    let z = cx.get(Symbol::Z)?;
    match side {
        Side::Left => {
            let levels = shifted_z_levels(cx, &z, m);
            Ok(-cx.chain(n, &levels, &|_| Ok(cx.c(1)))?)
        }
        Side::Right => {
            let qm_over_z = d(cx.qp(m)?, z.clone())?;
            let z_shift = z.clone() * cx.qp(-m)?;
            let denom_common = cx.poch(&z_shift, m + n)?;
            cx.sum(1, n, |r| {
                let num = cx.gb(n, r)? * cx.poch(&qm_over_z, r)? * cx.poch(&z, n - r)? * z.powi(r)?;
                d(num, denom_common.clone() * cx.omq(r)?.powi(m)?)
            })
        }
    }
}

#[derive(Clone, Copy)]
enum Kernel {
    /// `q^s / (1 - q^s)`; an `m = 0` level collapses to `1 / (1 - q^p)`.
    Lambert,
    /// `1 / (1 - q^s)`; an `m = 0` level collapses to `q^p / (1 - q^p)`.
    Reciprocal,
}

/// Levels `q^i/(1-q^i)^2 * h_{m_j - 1}(kernel over i..prev)`, collapsing to the
/// boundary term when `m_j = 0`.
fn h_levels<'a, F: Field>(cx: &'a Cx<'a, F>, ms: &[u32], kernel: Kernel) -> Vec<Level<'a, F>> {
    ms.iter()
        .map(|&m| {
            let m = i64::from(m);
            if m == 0 {
                match kernel {
                    Kernel::Lambert => Level::pinned(move |p| cx.omq(p)?.inv()),
                    Kernel::Reciprocal => Level::pinned(move |p| cx.lambert(p)),
                }
            } else {
                Level::free(move |i, p| {
                    let h = match kernel {
                        Kernel::Lambert => cx.h(m - 1, i, p, |s| cx.lambert(s))?,
                        Kernel::Reciprocal => cx.h(m - 1, i, p, |s| cx.omq(s)?.inv())?,
                    };
                    d(cx.qp(i)? * h, cx.omq(i)?.powi(2)?)
                })
            }
        })
        .collect()
}

fn ta1_8<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let ms = inst.m_vec()?;
    let x = cx.get(Symbol::X)?;
    match side {
        Side::Left => {
            let levels: Vec<_> = ms
                .iter()
                .map(|&m| {
                    let m = i64::from(m);
                    Level::free(move |i, _| d(cx.qp(m * i)?, cx.omq(i)?.powi(m + 1)?))
                })
                .collect();
            cx.chain(n, &levels, &|i| x.powi(i))
        }
        Side::Right => {
            let levels = h_levels(cx, ms, Kernel::Lambert);
            let term = |i: i64| Ok(cx.omq(i)? * (cx.c(1) - cx.poch(&x, i)?));
            cx.sum(1, n, |i| {
                let inner = cx.chain(i, &levels, &term)?;
                d(cx.bracket(n, i)? * cx.sgn(i - 1) * cx.qp(choose2(i + 1) - n * i)? * inner, cx.omq(i)?)
            })
        }
    }
}

fn ta1_9<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let ms = inst.m_vec()?;
    let x = cx.get(Symbol::X)?;
    match side {
        Side::Left => {
            let levels: Vec<_> = ms
                .iter()
                .map(|&m| {
                    let m = i64::from(m);
                    Level::free(move |i, _| d(cx.qp(i)?, cx.omq(i)?.powi(m + 1)?))
                })
                .collect();
            cx.chain(n, &levels, &|i| Ok(cx.c(1) - cx.poch(&x, i)?))
        }
        Side::Right => {
            let levels = h_levels(cx, ms, Kernel::Reciprocal);
            let term = |i: i64| Ok((cx.qp(-i)? - cx.c(1)) * x.powi(i)?);
            cx.sum(1, n, |i| {
                let inner = cx.chain(i, &levels, &term)?;
                d(cx.bracket(n, i)? * cx.sgn(i - 1) * cx.qp(choose2(i + 1))? * inner, cx.omq(i)?)
            })
        }
    }
}

/// Plain levels `q^(a_j i) / (1 - q^i)^(b_j)`.
fn power_levels<'a, F: Field>(cx: &'a Cx<'a, F>, spec: Vec<(i64, i64)>) -> Vec<Level<'a, F>> {
    spec.into_iter().map(|(a, b)| Level::free(move |i, _| d(cx.qp(a * i)?, cx.omq(i)?.powi(b)?))).collect()
}

fn c2_14<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let ns = inst.m_vec()?;
    let x = cx.get(Symbol::X)?;
    match side {
        Side::Left => {
            let levels = h_levels(cx, ns, Kernel::Reciprocal);
            cx.chain(n, &levels, &|i| Ok((cx.qp(-i)? - cx.c(1)) * x.powi(i)?))
        }
        Side::Right => {
            let n1 = i64::from(ns[0]);
            let levels = power_levels(cx, ns[1..].iter().map(|&v| (1, i64::from(v) + 1)).collect());
            let term = |i: i64| Ok(cx.c(1) - cx.poch(&x, i)?);
            cx.sum(1, n, |i| {
                let inner = cx.chain(i, &levels, &term)?;
                d(cx.bracket(n, i)? * cx.sgn(i - 1) * cx.qp(choose2(i + 1) - n * i)? * inner, cx.omq(i)?.powi(n1)?)
            })
        }
    }
}

fn c2_15<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let ns = inst.m_vec()?;
    let x = cx.get(Symbol::X)?;
    match side {
        Side::Left => {
            let levels = h_levels(cx, ns, Kernel::Lambert);
            cx.chain(n, &levels, &|i| Ok(cx.omq(i)? * (cx.c(1) - cx.poch(&x, i)?)))
        }
        Side::Right => {
            let n1 = i64::from(ns[0]);
            let levels =
                power_levels(cx, ns[1..].iter().map(|&v| (i64::from(v), i64::from(v) + 1)).collect());
            let term = |i: i64| x.powi(i);
            cx.sum(1, n, |i| {
                let inner = cx.chain(i, &levels, &term)?;
                d(cx.bracket(n, i)? * cx.sgn(i - 1) * cx.qp(choose2(i) + i * n1)? * inner, cx.omq(i)?.powi(n1)?)
            })
        }
    }
}

fn pb1_10<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let ls = inst.l_vec()?;
    let zs = cx.zs();
    let k = ls.len();
    let x = cx.get(Symbol::X)?;
    let q = cx.q.clone();
    match side {
        Side::Left => {
            let levels: Vec<_> = (0..k)
                .map(|j| {
                    let l = i64::from(ls[j]);
                    let zj = zs[j].clone();
                    let q = q.clone();
                    let next = zs.get(j + 1).cloned().filter(|_| j + 1 < k);
                    Level::free(move |i, p| {
                        let h = cx.h(l - 1, i, p, |s| d(cx.qp(s)?, cx.om(&zj, s)?))?;
                        let mut w = d(cx.qp(i)? * h, cx.om(&zj, i)?)?;
                        if let Some(zn) = &next {
                            let ratio = d(cx.poch(&(zj.clone() * q.clone()), i)?, cx.omq(i)? * cx.poch(&(zn.clone() * q.clone()), i)?)?;
                            w = w * ratio;
                        }
                        Ok(w)
                    })
                })
                .collect();
            let zk_q = zs[k - 1].clone() * q.clone();
            cx.chain(n, &levels, &|i| d(cx.poch(&x, i)? * cx.poch(&zk_q, i)?, cx.qq(i)?))
        }
        Side::Right => {
            let l1 = i64::from(ls[0]);
            let z1 = zs[0].clone();
            let levels: Vec<_> = (1..k)
                .map(|j| {
                    let l = i64::from(ls[j]);
                    let zj = zs[j].clone();
                    Level::free(move |i, _| d(cx.qp(i * l)?, cx.omq(i)? * cx.om(&zj, i)?.powi(l)?))
                })
                .collect();
            let term = |i: i64| Ok(cx.c(1) - x.powi(i)?);
            let total = cx.sum(1, n, |i| {
                let inner = cx.chain(i, &levels, &term)?;
                d(cx.bracket(n, i)? * cx.sgn(i - 1) * cx.qp(choose2(i) + i * l1)? * inner, cx.om(&z1, i)?.powi(l1)?)
            })?;
            d(cx.poch(&(z1.clone() * q), n)? * total, cx.qq(n)?)
        }
    }
}

fn pb1_11<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let ls = inst.l_vec()?;
    let zs = cx.zs();
    let k = ls.len();
    let x = cx.get(Symbol::X)?;
    let q = cx.q.clone();
    match side {
        Side::Left => {
            let levels: Vec<_> = (0..k)
                .map(|j| {
                    let l = i64::from(ls[j]);
                    let zj = zs[j].clone();
                    let q = q.clone();
                    let next = zs.get(j + 1).cloned().filter(|_| j + 1 < k);
                    Level::free(move |i, p| {
                        let h = cx.h(l - 1, i, p, |s| (zj.clone() - cx.qp(s)?).inv())?;
                        let mut w = d(h, zj.clone() - cx.qp(i)?)?;
                        if let Some(zn) = &next {
                            let num = cx.qp(i)? * zj.powi(i)? * zn.powi(-i)? * cx.poch(&d(q.clone(), zj.clone())?, i)?;
                            let den = cx.omq(i)? * cx.poch(&d(q.clone(), zn.clone())?, i)?;
                            w = w * d(num, den)?;
                        }
                        Ok(w)
                    })
                })
                .collect();
            let zk = zs[k - 1].clone();
            let q_over_zk = d(q.clone(), zk.clone())?;
            cx.chain(n, &levels, &|i| {
                d((cx.c(1) - x.powi(i)?) * zk.powi(i)? * cx.poch(&q_over_zk, i)?, cx.qq(i)?)
            })
        }
        Side::Right => {
            let l1 = i64::from(ls[0]);
            let z1 = zs[0].clone();
            let levels: Vec<_> = (1..k)
                .map(|j| {
                    let l = i64::from(ls[j]);
                    let zj = zs[j].clone();
                    Level::free(move |i, _| d(cx.qp(i)?, cx.omq(i)? * (zj.clone() - cx.qp(i)?).powi(l)?))
                })
                .collect();
            let term = |i: i64| cx.poch(&x, i);
            let total = cx.sum(1, n, |i| {
                let inner = cx.chain(i, &levels, &term)?;
                d(
                    cx.bracket(n, i)? * cx.sgn(i - 1) * cx.qp(choose2(i + 1) - n * i)? * inner,
                    (z1.clone() - cx.qp(i)?).powi(l1)?,
                )
            })?;
            let pre = d(z1.powi(n)? * cx.poch(&d(q, z1.clone())?, n)?, cx.qq(n)?)?;
            Ok(pre * total)
        }
    }
}

fn c3_3<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let l = inst.need(ShapeKey::L)?;
    let x = cx.get(Symbol::X)?;
    let z = cx.get(Symbol::Z)?;
    let zq = z.clone() * cx.q.clone();
    match side {
        Side::Left => cx.sum(1, n, |i| {
            let h = cx.h(l - 1, i, n, |s| d(cx.qp(s)?, cx.om(&z, s)?))?;
            d(cx.poch(&x, i)? * cx.poch(&zq, i - 1)? * cx.qp(i)? * h, cx.qq(i)?)
        }),
        Side::Right => {
            let total = cx.sum(1, n, |i| {
                let num = cx.bracket(n, i)? * cx.sgn(i - 1) * cx.qp(choose2(i) + i * l)? * (cx.c(1) - x.powi(i)?);
                d(num, cx.om(&z, i)?.powi(l)?)
            })?;
            d(cx.poch(&zq, n)? * total, cx.qq(n)?)
        }
    }
}

fn c3_4<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let l = inst.need(ShapeKey::L)?;
    let x = cx.get(Symbol::X)?;
    let z = cx.get(Symbol::Z)?;
    let q_over_z = d(cx.q.clone(), z.clone())?;
    match side {
        Side::Left => cx.sum(1, n, |i| {
            let h = cx.h(l - 1, i, n, |s| (z.clone() - cx.qp(s)?).inv())?;
            d((cx.c(1) - x.powi(i)?) * cx.poch(&q_over_z, i - 1)? * z.powi(i - 1)? * h, cx.qq(i)?)
        }),
        Side::Right => {
            let total = cx.sum(1, n, |i| {
                let num = cx.bracket(n, i)? * cx.sgn(i - 1) * cx.qp(choose2(i + 1) - n * i)? * cx.poch(&x, i)?;
                d(num, (z.clone() - cx.qp(i)?).powi(l)?)
            })?;
            d(z.powi(n)? * cx.poch(&q_over_z, n)? * total, cx.qq(n)?)
        }
    }
}

/// `sum_i bracket(n, i) (-1)^(i-1) q^(C(i+1,2) - i n) f(i)`.
fn inversion_sum<F: Field>(cx: &Cx<F>, n: i64, mut f: impl FnMut(i64) -> Result<F>) -> Result<F> {
    cx.sum(1, n, |i| Ok(cx.bracket(n, i)? * cx.sgn(i - 1) * cx.qp(choose2(i + 1) - i * n)? * f(i)?))
}

fn fl3_5<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let w = cx.get(Symbol::W)?;
    let y = cx.get(Symbol::Y)?;
    let yq = y.clone() * cx.q.clone();
    match side {
        Side::Left => {
            let s = cx.sum(1, n, |i| d(w.powi(i)? * y.powi(n - i)? * cx.poch(&yq, i - 1)?, cx.qq(i)?))?;
            d(cx.qq(n)? * s, cx.poch(&yq, n)?)
        }
        Side::Right => inversion_sum(cx, n, |i| d(cx.c(1) - cx.poch(&w, i)?, cx.om(&y, i)?)),
    }
}

fn p3_6<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let (w, x, y, z) = (cx.get(Symbol::W)?, cx.get(Symbol::X)?, cx.get(Symbol::Y)?, cx.get(Symbol::Z)?);
    let wx = w.clone() * x.clone();
    let yz = y.clone() * z.clone();
    match side {
        Side::Left => {
            let s = cx.sum(1, n, |i| {
                let num = w.powi(i)? * y.powi(n - i)? * cx.poch(&x, i)? * cx.poch(&y, i)? * cx.poch(&z, n - i)?;
                d(num, cx.poch(&wx, i)? * cx.qq(i)? * cx.qq(n - i)?)
            })?;
            d(cx.qq(n)? * s, cx.poch(&yz, n)?)
        }
        Side::Right => inversion_sum(cx, n, |i| {
            let ratio = cx.c(1) - d(cx.poch(&w, i)?, cx.poch(&wx, i)?)?;
            d(ratio * cx.poch(&y, i)?, cx.poch(&yz, i)?)
        }),
    }
}

fn a3_7<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let (w, x, y) = (cx.get(Symbol::W)?, cx.get(Symbol::X)?, cx.get(Symbol::Y)?);
    let wx = w.clone() * x.clone();
    let yq = y.clone() * cx.q.clone();
    match side {
        Side::Left => {
            let s = cx.sum(1, n, |i| {
                let num = w.powi(i)? * y.powi(n - i)? * cx.poch(&x, i)? * cx.poch(&yq, i - 1)?;
                d(num, cx.poch(&wx, i)? * cx.qq(i)?)
            })?;
            d(cx.qq(n)? * s, cx.poch(&yq, n)?)
        }
        Side::Right => inversion_sum(cx, n, |i| {
            let ratio = cx.c(1) - d(cx.poch(&w, i)?, cx.poch(&wx, i)?)?;
            d(ratio, cx.om(&y, i)?)
        }),
    }
}

fn a3_8<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let (w, x, y) = (cx.get(Symbol::W)?, cx.get(Symbol::X)?, cx.get(Symbol::Y)?);
    let wx = w.clone() * x.clone();
    match side {
        Side::Left => {
            let s = cx.sum(1, n, |i| {
                let num = w.powi(i)? * y.powi(n - i)? * cx.poch(&x, i)? * cx.poch(&y, i)?;
                d(num, cx.poch(&wx, i)? * cx.qq(i)? * cx.qq(n - i)?)
            })?;
            Ok(cx.qq(n)? * s)
        }
        Side::Right => inversion_sum(cx, n, |i| {
            let ratio = cx.c(1) - d(cx.poch(&w, i)?, cx.poch(&wx, i)?)?;
            Ok(ratio * cx.poch(&y, i)?)
        }),
    }
}

fn a3_9<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let (w, y, z) = (cx.get(Symbol::W)?, cx.get(Symbol::Y)?, cx.get(Symbol::Z)?);
    let yz = y.clone() * z.clone();
    match side {
        Side::Left => {
            let s = cx.sum(1, n, |i| {
                let num = w.powi(i)? * y.powi(n - i)? * cx.poch(&y, i)? * cx.poch(&z, n - i)?;
                d(num, cx.qq(i)? * cx.qq(n - i)?)
            })?;
            d(cx.qq(n)? * s, cx.poch(&yz, n)?)
        }
        Side::Right => inversion_sum(cx, n, |i| {
            d((cx.c(1) - cx.poch(&w, i)?) * cx.poch(&y, i)?, cx.poch(&yz, i)?)
        }),
    }
}

fn c3_10<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let r = inst.need(ShapeKey::R)?;
    let (y, z) = (cx.get(Symbol::Y)?, cx.get(Symbol::Z)?);
    let yz = y.clone() * z.clone();
    match side {
        Side::Left => cx.sum(1, n, |i| {
            let num = cx.gb(n, i)? * cx.gb(i, r)? * cx.sgn(i - 1) * cx.qp(choose2(i + 1) - i * n)? * cx.poch(&y, i)?;
            d(num, cx.poch(&yz, i)?)
        }),
        Side::Right => {
            let num = y.powi(n - r)? * cx.sgn(r - 1) * cx.qp(-choose2(r))? * cx.qq(n)? * cx.poch(&y, r)? * cx.poch(&z, n - r)?;
            d(num, cx.poch(&yz, n)? * cx.qq(r)? * cx.qq(n - r)?)
        }
    }
}

fn p4_1<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let zs = cx.zs();
    let k = zs.len();
    let x = cx.get(Symbol::X)?;
    let q = cx.q.clone();
    match side {
        Side::Left => {
            let levels: Vec<_> = zs
                .iter()
                .map(|zj| Level::free(move |i, _| d(cx.qp(i)?, cx.omq(i)? * cx.om(zj, i)?)))
                .collect();
            cx.chain(n, &levels, &|i| Ok(cx.c(1) - x.powi(i)?))
        }
        Side::Right => {
            let levels: Vec<_> = (0..k)
                .map(|j| {
                    let zj = zs[j].clone();
                    let q = q.clone();
                    let next = zs.get(j + 1).cloned();
                    Level::free(move |i, _| {
                        let mut w = d(cx.qp(i)?, cx.om(&zj, i)?)?;
                        if let Some(zn) = &next {
                            w = w * d(cx.poch(&(zj.clone() * q.clone()), i)?, cx.omq(i)? * cx.poch(&(zn.clone() * q.clone()), i)?)?;
                        }
                        Ok(w)
                    })
                })
                .collect();
            let zk_q = zs[k - 1].clone() * q.clone();
            let term = |i: i64| d(cx.poch(&x, i)? * cx.poch(&zk_q, i)?, cx.qq(i)?);
            let z1q = zs[0].clone() * q.clone();
            inversion_sum(cx, n, |i| {
                let inner = cx.chain(i, &levels, &term)?;
                d(cx.qq(i - 1)? * inner, cx.poch(&z1q, i)?)
            })
        }
    }
}

/// Shared right side of the `z_j = z q^-j` family.
fn s4_right<F: Field>(cx: &Cx<F>, n: i64, k: i64, z: &F, term: Term<'_, F>) -> Result<F> {
    let levels: Vec<_> = (0..k).map(|_| Level::free(|i, _| cx.lambert(i))).collect();
    let total = inversion_sum(cx, n, |i| {
        let inner = cx.chain(i, &levels, &*term)?;
        d(cx.qq(i - 1)? * inner, cx.poch(z, i)?)
    })?;
    d(total, cx.poch(&(z.clone() * cx.qp(-k)?), k)?)
}

fn s4<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let k = inst.need(ShapeKey::K)?;
    let z = cx.get(Symbol::Z)?;
    let zk = z.clone() * cx.qp(-k)?;
    match (inst.id, side) {
        (IdentityId::S4_2, Side::Left) => {
            let x = cx.get(Symbol::X)?;
            cx.chain(n, &shifted_z_levels(cx, &z, k), &|i| Ok(cx.c(1) - x.powi(i)?))
        }
        (IdentityId::S4_2, Side::Right) => {
            let x = cx.get(Symbol::X)?;
            s4_right(cx, n, k, &z, Box::new(move |i| d(cx.poch(&x, i)? * cx.poch(&zk, i)?, cx.qq(i - 1)?)))
        }
        (IdentityId::S4_3, Side::Left) => {
            let x = cx.get(Symbol::X)?;
            let t = cx.get(Symbol::T)?;
            let xt = x.clone() * t.clone();
            cx.chain(n, &shifted_z_levels(cx, &z, k), &|i| {
                Ok(cx.c(1) - x.powi(i)? * d(cx.poch(&t, i)?, cx.poch(&xt, i)?)?)
            })
        }
        (IdentityId::S4_3, Side::Right) => {
            let x = cx.get(Symbol::X)?;
            let t = cx.get(Symbol::T)?;
            let xt = x.clone() * t;
            s4_right(
                cx,
                n,
                k,
                &z,
                Box::new(move |i| d(cx.poch(&x, i)? * cx.poch(&zk, i)?, cx.poch(&xt, i)? * cx.qq(i - 1)?)),
            )
        }
        (IdentityId::S4_4, Side::Left) => {
            let t = cx.get(Symbol::T)?;
            cx.chain(n, &shifted_z_levels(cx, &z, k), &|i| cx.sum(1, i, |r| cx.om(&t, r - 1)?.inv()))
        }
        (IdentityId::S4_4, Side::Right) => {
            let t = cx.get(Symbol::T)?;
            s4_right(cx, n, k, &z, Box::new(move |i| d(cx.poch(&zk, i)?, cx.poch(&t, i)?)))
        }
        _ => unreachable!("dispatched only for the three specialisations"),
    }
}

fn s4_5<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let top = inst.need(ShapeKey::I)?;
    let k = inst.need(ShapeKey::K)?;
    let z = cx.get(Symbol::Z)?;
    let t = cx.get(Symbol::T)?;
    match side {
        Side::Left => {
            let zk = z.clone() * cx.qp(-k)?;
            let levels: Vec<_> = (0..k).map(|_| Level::free(|i, _| cx.lambert(i))).collect();
            cx.chain(top, &levels, &|i| d(cx.poch(&zk, i)?, cx.poch(&t, i)?))
        }
        Side::Right => {
            let tqz = d(t.clone() * cx.qp(k)?, z.clone())?;
            cx.sum(1, top, |r| {
                let tail = z.powi(r)? * cx.qp(-r * k)? * d(cx.poch(&tqz, r)?, cx.poch(&t, r)?)?;
                let num = cx.gb(top, r)? * cx.sgn(r - 1) * cx.qp(choose2(r) + r * k)? * (cx.c(1) - tail);
                d(num, cx.omq(r)?.powi(k)?)
            })
        }
    }
}

fn e4_7<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let r = inst.need(ShapeKey::R)?;
    let z = cx.get(Symbol::Z)?;
    match side {
        Side::Left => cx.sum(1, n, |i| {
            let num = cx.gb(n, i)? * cx.gb(i, r)? * cx.sgn(i - 1) * cx.qp(choose2(i + 1) - n * i)? * cx.qq(i - 1)?;
            d(num, cx.poch(&z, i)?)
        }),
        Side::Right => {
            let num = cx.sgn(r - 1) * cx.qp(-choose2(r))? * cx.qq(n)? * cx.poch(&z, n - r)?;
            let rest = cx.poch(&z, n)? * cx.qq(n - r)?;
            let den = match cx.reading {
                Reading::Corrected => cx.omq(r)? * rest,
                Reading::Printed => cx.c(1) - cx.qp(r)? * rest,
            };
            d(num, den)
        }
    }
}

fn pc1_12<F: Field>(cx: &Cx<F>, inst: &IdentityInstance, side: Side) -> Result<F> {
    let n = inst.need(ShapeKey::N)?;
    let k = inst.need(ShapeKey::K)?;
    let z = cx.get(Symbol::Z)?;
    let t = cx.get(Symbol::T)?;
    match side {
        Side::Left => cx.chain(n, &shifted_z_levels(cx, &z, k), &|i| {
            cx.sum(1, i, |r| Ok(cx.om(&z, r - k - 1)?.inv()? - cx.om(&t, r - 1)?.inv()?))
        }),
        Side::Right => {
            let tqz = d(t.clone() * cx.qp(k)?, z.clone())?;
            let common = cx.poch(&(z.clone() * cx.qp(-k)?), n + k)?;
            cx.sum(1, n, |r| {
                let num = cx.gb(n, r)? * cx.qq(r - 1)? * cx.poch(&tqz, r)? * cx.poch(&z, n - r)? * z.powi(r)?;
                d(num, common.clone() * cx.poch(&t, r)? * cx.omq(r)?.powi(k)?)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{int, rat, ExactScalar};

    fn pair(text: &str, id: IdentityId) -> (ExactScalar, ExactScalar) {
        let inst = IdentityInstance::parse_assignments(id, text).unwrap();
        inst.validate().unwrap();
        let vals = Vals::from_env(&int(1), &inst.env);
        eval_pair(&inst, &vals, EvalOptions::default()).unwrap()
    }

    #[test]
    fn dilcher_small_case() {
        let (l, r) = pair("n=2,m=1,q=1/2", IdentityId::D1_1);
        assert_eq!(l, rat(4, 3));
        assert_eq!(r, rat(4, 3));
    }

    #[test]
    fn prodinger_single_term() {
        let (l, r) = pair("n=1,m=2,q=1/3", IdentityId::P1_3);
        assert_eq!(l, rat(3, 4));
        assert_eq!(r, rat(3, 4));
    }

    #[test]
    fn empty_sums_vanish() {
        let (l, r) = pair("n=0,k=2,mv=1:0,q=2/5,x=1/3", IdentityId::TA1_8);
        assert_eq!(l, int(0));
        assert_eq!(r, int(0));
    }

    #[test]
    fn spot_checks_hold() {
        let cases = [
            (IdentityId::FL1_4, "n=3,m=2,q=2/5,x=1/3"),
            (IdentityId::Z1_5, "n=3,m=2,q=2/5,x=1/3,z=3/7"),
            (IdentityId::GZ1_6, "n=3,m=2,q=2/5,z=3/7"),
            (IdentityId::TA1_8, "n=4,k=3,mv=2:0:1,q=2/5,x=1/3"),
            (IdentityId::TA1_9, "n=4,k=3,mv=2:0:1,q=2/5,x=1/3"),
            (IdentityId::C2_14, "n=4,r=3,mv=1:2:0,q=2/5,x=1/3"),
            (IdentityId::C2_15, "n=4,r=3,mv=1:2:0,q=2/5,x=1/3"),
            (IdentityId::PB1_10, "n=4,k=3,lv=1:2:1,zv=3/7:7/2:-4/3,q=2/5,x=1/3"),
            (IdentityId::PB1_11, "n=4,k=3,lv=1:2:1,zv=3/7:7/2:-4/3,q=2/5,x=1/3"),
            (IdentityId::C3_3, "n=4,l=2,q=2/5,x=1/3,z=3/7"),
            (IdentityId::C3_4, "n=4,l=2,q=2/5,x=1/3,z=7/2"),
            (IdentityId::FL3_5, "n=4,q=2/5,w=1/5,y=3"),
            (IdentityId::P3_6, "n=4,q=2/5,w=1/5,x=1/3,y=3,z=3/7"),
            (IdentityId::A3_7, "n=4,q=2/5,w=1/5,x=1/3,y=3"),
            (IdentityId::A3_8, "n=4,q=2/5,w=1/5,x=1/3,y=3"),
            (IdentityId::A3_9, "n=4,q=2/5,w=1/5,y=3,z=3/7"),
            (IdentityId::C3_10, "n=4,r=2,q=2/5,y=3,z=3/7"),
            (IdentityId::P4_1, "n=4,k=3,zv=3/7:7/2:-4/3,q=2/5,x=1/3"),
            (IdentityId::S4_2, "n=4,k=2,q=2/5,x=1/3,z=3/7"),
            (IdentityId::S4_3, "n=4,k=2,q=2/5,x=1/3,z=3/7,t=-2/9"),
            (IdentityId::S4_4, "n=4,k=2,q=2/5,z=3/7,t=-2/9"),
            (IdentityId::S4_5, "i=4,k=2,q=2/5,z=3/7,t=-2/9"),
            (IdentityId::E4_7, "n=4,r=2,q=2/5,z=3/7"),
            (IdentityId::PC1_12, "n=4,k=2,q=2/5,z=3/7,t=-2/9"),
        ];
        for (id, text) in cases {
            let (l, r) = pair(text, id);
            assert_eq!(l, r, "{id} {text}");
        }
    }

    #[test]
    fn chain_orders_agree() {
        let inst = IdentityInstance::parse_assignments(IdentityId::PB1_11, "n=5,k=2,lv=2:1,zv=3/7:-4/3,q=2/5,x=1/3").unwrap();
        let vals = Vals::from_env(&int(1), &inst.env);
        let mut seen = Vec::new();
        for order in [ChainOrder::Descending, ChainOrder::Reversed, ChainOrder::Memoized] {
            let opts = EvalOptions { order, ..Default::default() };
            seen.push(eval_pair(&inst, &vals, opts).unwrap());
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn printed_typeset_denominator_fails() {
        let inst = IdentityInstance::parse_assignments(IdentityId::E4_7, "n=4,r=2,q=2/5,z=3/7").unwrap();
        let vals = Vals::from_env(&int(1), &inst.env);
        let (l, r) = eval_pair(&inst, &vals, EvalOptions { reading: Reading::Printed, ..Default::default() }).unwrap();
        assert_ne!(l, r);
    }

    #[test]
    fn numeric_ids_are_rejected() {
        let inst = IdentityInstance::parse_assignments(IdentityId::K1_2, "q=1/2").unwrap();
        let vals = Vals::from_env(&int(1), &inst.env);
        assert!(matches!(eval_side(&inst, Side::Left, &vals, EvalOptions::default()), Err(Error::Schema(_))));
    }
}
