//! Truncated series and products with tail estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

use super::bigreal::{BigReal, DEFAULT_PRECISION};

pub const DEFAULT_TERMS: usize = 128;
pub const MAX_TERMS: usize = 4096;
pub const DEFAULT_TOLERANCE: f64 = 1e-30;

/// Number of trailing term ratios inspected by the ratio test.
const RATIO_WINDOW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericConfig {
    /// Working precision in bits.
    pub prec: usize,
    /// Initial number of terms or factors.
    pub k: usize,
    /// Cap for ratio-driven extension.
    pub k_max: usize,
    /// Acceptance tolerance; also the target tail when extending.
    pub tol: f64,
    /// Double `k` until the tail estimate drops below `tol`.
    pub auto_extend: bool,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            prec: DEFAULT_PRECISION,
            k: DEFAULT_TERMS,
            k_max: MAX_TERMS,
            tol: DEFAULT_TOLERANCE,
            auto_extend: true,
        }
    }
}

impl NumericConfig {
    pub fn with_prec(mut self, prec: usize) -> Self {
        self.prec = prec;
        self
    }

    pub fn with_terms(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn fixed(mut self) -> Self {
        self.auto_extend = false;
        self
    }

    pub fn one(&self) -> BigReal {
        BigReal::one(self.prec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.prec < 16 {
            return Err(Error::schema(format!("precision {} bits is too small", self.prec)));
        }
        if self.k < RATIO_WINDOW + 1 || self.k > self.k_max {
            return Err(Error::schema(format!("term count {} outside {}..={}", self.k, RATIO_WINDOW + 1, self.k_max)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::schema("tolerance must be positive"));
        }
        Ok(())
    }
}

/// How a truncated evaluation ended.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    /// Terms or factors actually used.
    pub k: usize,
    pub tail_bound: BigReal,
    pub converged: bool,
}

/// A value together with an upper bound on its absolute error.
#[derive(Debug, Clone, PartialEq)]
pub struct Approx {
    pub value: BigReal,
    pub err: BigReal,
}

impl Approx {
    pub fn exact(value: BigReal) -> Self {
        let err = value.zero_like();
        Approx { value, err }
    }

    pub fn new(value: BigReal, err: BigReal) -> Self {
        Approx { value, err }
    }

    pub fn add(&self, o: &Approx) -> Approx {
        Approx::new(self.value.clone() + o.value.clone(), self.err.clone() + o.err.clone())
    }

    pub fn sub(&self, o: &Approx) -> Approx {
        Approx::new(self.value.clone() - o.value.clone(), self.err.clone() + o.err.clone())
    }

    pub fn mul(&self, o: &Approx) -> Approx {
        let err = self.value.abs() * o.err.clone() + o.value.abs() * self.err.clone() + self.err.clone() * o.err.clone();
        Approx::new(self.value.clone() * o.value.clone(), err)
    }

    pub fn scale(&self, c: &BigReal) -> Approx {
        Approx::new(self.value.clone() * c.clone(), self.err.clone() * c.abs())
    }

    /// Quotient; the divisor must be bounded away from zero by its error.
    pub fn div(&self, o: &Approx) -> Result<Approx> {
        let den = o.value.abs();
        if den <= o.err.clone() + o.err.clone() {
            return Err(Error::pole("denominator indistinguishable from zero"));
        }
        let value = self.value.div(&o.value)?;
        // |(a+e)/(b-f) - a/b| <= (|a| f + |b| e) / (|b| (|b| - f)).
        let num = self.value.abs() * o.err.clone() + den.clone() * self.err.clone();
        let err = num.div(&(den.clone() * (den - o.err.clone())))?;
        Ok(Approx { value, err })
    }
}

/// Bits below the working precision at which a term counts as round-off.
const NOISE_MARGIN: usize = 8;

/// Ratio estimate over the last `RATIO_WINDOW` ratios; `None` if any ratio
/// is unbounded or the maximum is not below one. Terms under `floor` are
/// round-off and treated as zero.
fn ratio_estimate(terms: &[BigReal], floor: &BigReal) -> Option<BigReal> {
    let one = terms.first()?.one_like();
    if terms.len() < RATIO_WINDOW + 1 {
        return None;
    }
    let tail = &terms[terms.len() - RATIO_WINDOW - 1..];
    let mut worst = one.zero_like();
    for w in tail.windows(2) {
        let (a, b) = (w[0].abs(), w[1].abs());
        let r = if a <= *floor {
            if b <= *floor {
                one.zero_like()
            } else {
                return None;
            }
        } else {
            b.div(&a).ok()?
        };
        worst = worst.max(r);
    }
    (worst < one).then_some(worst)
}

/// Sum a series whose first `k` terms are produced by `terms(k)`.
///
/// The tail is estimated as `2 |t_last| rho / (1 - rho)` once the maximal
/// ratio `rho` over the last eight terms is below one. Terms that have sunk
/// into round-off (below `2^-(prec - 8)` times the largest term) count as
/// zero, and that noise floor is added to the estimate. With auto-extension
/// `k` doubles until the estimate is under the tolerance or `k_max` is
/// reached.
pub fn sum_series(
    cfg: &NumericConfig,
    mut terms: impl FnMut(usize) -> Result<Vec<BigReal>>,
) -> Result<(BigReal, Truncation)> {
    let mut k = cfg.k.max(RATIO_WINDOW + 1);
    loop {
        let t = terms(k)?;
        let one = cfg.one();
        let sum = t.iter().fold(one.zero_like(), |acc, x| acc + x.clone());
        let scale = t.iter().fold(one.zero_like(), |acc, x| acc.max(x.abs()));
        let floor = scale * BigReal::from_i64(2, cfg.prec).powi(-(cfg.prec.saturating_sub(NOISE_MARGIN) as i64))?;
        match ratio_estimate(&t, &floor) {
            Some(rho) => {
                let last = t.last().expect("k >= 9").abs();
                let two = one.lift(2);
                let tail = (two * last * rho.clone()).div(&(one - rho))? + floor;
                if !cfg.auto_extend || tail.to_f64() <= cfg.tol || k >= cfg.k_max {
                    return Ok((sum, Truncation { k, tail_bound: tail, converged: true }));
                }
            }
            None => {
                if !cfg.auto_extend || k >= cfg.k_max {
                    return Err(Error::convergence(format!("ratio test not below 1 after {k} terms")));
                }
            }
        }
        k = (2 * k).min(cfg.k_max);
    }
}

/// Same as [`sum_series`] but packaged as an [`Approx`].
pub fn sum_series_approx(cfg: &NumericConfig, terms: impl FnMut(usize) -> Result<Vec<BigReal>>) -> Result<(Approx, usize)> {
    let (v, t) = sum_series(cfg, terms)?;
    Ok((Approx::new(v, t.tail_bound), t.k))
}

fn require_unit_disc(q: &BigReal) -> Result<()> {
    if q.abs() >= q.one_like() {
        return Err(Error::domain(format!("|q| = {} is not below 1", q.abs().to_decimal_digits(12))));
    }
    Ok(())
}

/// `prod_{j<k} (1 - a q^j)` with a bound on the distance to the infinite
/// product. Needs `s = |a q^k| / (1 - |q|) <= 1/4`, in which case
/// `|prod_{j>=k}(1 - a q^j) - 1| <= exp(2s) - 1 <= 4s`.
pub fn qpoch_truncated(a: &BigReal, q: &BigReal, k: usize) -> Result<(BigReal, Truncation)> {
    require_unit_disc(q)?;
    let one = q.one_like();
    let mut acc = one.clone();
    let mut aq = a.clone();
    for _ in 0..k {
        acc = acc * (one.clone() - aq.clone());
        aq = aq * q.clone();
    }
    let s = aq.abs().div(&(one.clone() - q.abs()))?;
    if s.clone() * one.lift(4) > one {
        return Err(Error::convergence(format!("{k} factors leave the product tail undominated")));
    }
    let tail = acc.abs() * one.lift(4) * s;
    Ok((acc, Truncation { k, tail_bound: tail, converged: true }))
}

/// `(a; q)_inf`, truncated once `|a q^K| < 2^-prec`.
pub fn qpoch_infinite(a: &BigReal, q: &BigReal, prec: usize) -> Result<(BigReal, Truncation)> {
    require_unit_disc(q)?;
    let a = a.with_precision(prec);
    let q = q.with_precision(prec);
    let mut aq = a.clone();
    let mut k = 0;
    while !aq.below_pow2(-(prec as isize)) {
        if k >= MAX_TERMS * 4 {
            return Err(Error::convergence("infinite product needs too many factors"));
        }
        aq = aq * q.clone();
        k += 1;
    }
    // Two extra factors make the 1/(1 - |q|) factor harmless for q <= 3/4.
    qpoch_truncated(&a, &q, k.max(1) + 2)
}

pub fn qpoch_infinite_approx(a: &BigReal, q: &BigReal, prec: usize) -> Result<Approx> {
    let (v, t) = qpoch_infinite(a, q, prec)?;
    Ok(Approx::new(v, t.tail_bound))
}

/// `(x; q)_n = (x; q)_inf / (x q^n; q)_inf` for real `n`.
pub fn qpoch_real_order(x: &BigReal, q: &BigReal, n: &BigReal, prec: usize) -> Result<Approx> {
    require_unit_disc(q)?;
    if q.is_negative() || q.is_zero() {
        return Err(Error::domain("real-order q-Pochhammer needs 0 < q < 1"));
    }
    let qn = q.with_precision(prec).pow_real(n)?;
    let num = qpoch_infinite_approx(x, q, prec)?;
    let den = qpoch_infinite_approx(&(x.with_precision(prec) * qn), q, prec)?;
    num.div(&den)
}

/// `sum_{u>=1} (a(u) - a(u + n)) + n * limit`, the continuation of
/// `sum_{u=1}^{n} a(u)` to real `n`. `limit` is `lim a(u)` and may be zero.
pub fn shifted_sum_real(
    a: impl Fn(&BigReal) -> Result<BigReal>,
    n: &BigReal,
    limit: &BigReal,
    cfg: &NumericConfig,
) -> Result<(BigReal, Truncation)> {
    let one = cfg.one();
    let n = n.with_precision(cfg.prec);
    let (s, t) = sum_series(cfg, |k| {
        (1..=k)
            .map(|u| {
                let u = one.lift(u as i64);
                Ok(a(&u)? - a(&(u + n.clone()))?)
            })
            .collect()
    })?;
    Ok((s + n * limit.clone(), t))
}
