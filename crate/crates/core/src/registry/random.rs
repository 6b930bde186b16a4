//! Seeded random instances for campaigns and property tests.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{int, rat, ExactScalar, Field};
use crate::params::Symbol;

use super::instance::{IdentityInstance, ShapeKey};
use super::poles::check_poles;
use super::{entry_for, Backend, IdentityId, Param};

/// Largest numerator and denominator magnitude of random parameters.
pub const PARAM_HEIGHT: i64 = 50;

const DEFAULT_RETRIES: usize = 1000;

/// Size caps for random instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub n: u32,
    pub k: u32,
    /// Cap for `m` and entries of `mv`.
    pub m: u32,
    /// Cap for `l` and entries of `lv`.
    pub l: u32,
    pub retries: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { n: 8, k: 3, m: 3, l: 3, retries: DEFAULT_RETRIES }
    }
}

impl Bounds {
    /// Parse overrides such as `n=6,k=3` on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut b = Bounds::default();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) =
                part.split_once('=').ok_or_else(|| Error::schema(format!("expected key=value in bounds, got `{part}`")))?;
            let v: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::schema(format!("bound `{key}` expects a non-negative integer, got `{value}`")))?;
            let small = || u32::try_from(v).map_err(|_| Error::schema(format!("bound `{key}` is too large")));
            match key.trim() {
                "n" => b.n = small()?,
                "k" => b.k = small()?,
                "m" => b.m = small()?,
                "l" => b.l = small()?,
                "retries" => b.retries = v,
                other => return Err(Error::schema(format!("unknown bound `{other}`"))),
            }
        }
        b.validate()?;
        Ok(b)
    }

    /// Desk-scale limits: `n <= 12`, `k <= 4`, vector entries `<= 4`.
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: u32, lo: u32, hi: u32| {
            if v < lo || v > hi {
                Err(Error::schema(format!("bound `{name}` = {v} must lie in {lo}..={hi}")))
            } else {
                Ok(())
            }
        };
        check("n", self.n, 1, 12)?;
        check("k", self.k, 1, 4)?;
        check("m", self.m, 1, 4)?;
        check("l", self.l, 1, 4)?;
        if self.retries == 0 {
            return Err(Error::schema("bound `retries` must be positive"));
        }
        Ok(())
    }
}

fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub(crate) fn rng_for(tag: &str, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(tag))
}

/// `p/d` with `|p| <= 50`, `1 <= d <= 50`.
fn any_rational(rng: &mut impl Rng) -> ExactScalar {
    rat(rng.random_range(-PARAM_HEIGHT..=PARAM_HEIGHT), rng.random_range(1..=PARAM_HEIGHT))
}

/// A rational strictly inside `(-1, 1)`.
fn unit_rational(rng: &mut impl Rng) -> ExactScalar {
    let d = rng.random_range(2..=PARAM_HEIGHT);
    rat(rng.random_range(-(d - 1)..=d - 1), d)
}

/// A rational in `(0, 1/2]`.
fn small_base(rng: &mut impl Rng) -> ExactScalar {
    let d = rng.random_range(2..=PARAM_HEIGHT);
    rat(rng.random_range(1..=d / 2), d)
}

/// Conservative exclusion used on top of the exact pole predicates: no
/// deformation parameter sits on `q^j` for a small window of `j`, and the
/// base stays away from the roots of unity that make `1 - q^j` vanish.
fn conservative(inst: &IdentityInstance, window: i64) -> bool {
    let Some(q) = inst.env.get(Symbol::Q) else { return false };
    if q.is_zero() || q.abs().is_one() {
        return false;
    }
    for s in [Symbol::Z, Symbol::T] {
        if let Some(v) = inst.env.get(s) {
            for j in -window..=window {
                if (v.clone() * q.powi(j).expect("q nonzero")).is_one() {
                    return false;
                }
            }
        }
    }
    true
}

fn draw(id: IdentityId, rng: &mut ChaCha8Rng, b: &Bounds) -> Result<IdentityInstance> {
    use IdentityId::*;
    let entry = entry_for(id);
    let mut inst = IdentityInstance::new(id);
    let n = rng.random_range(1..=b.n);
    let k = rng.random_range(1..=b.k);
    for p in entry.params {
        if let Param::Shape(key) = *p {
            let v = match key {
                ShapeKey::N => n,
                ShapeKey::K => k,
                ShapeKey::M => rng.random_range(1..=b.m),
                ShapeKey::L => rng.random_range(1..=b.l),
                ShapeKey::R => match id {
                    C3_10 | E4_7 => rng.random_range(1..=n),
                    _ => k,
                },
                ShapeKey::I => match id {
                    L3_1 | L3_2 => rng.random_range(1..=n),
                    FINE => rng.random_range(0..=n),
                    _ => rng.random_range(1..=b.n.min(4)),
                },
                ShapeKey::MVec => {
                    let len = if matches!(id, C2_14 | C2_15) { inst.r.unwrap_or(k) } else { k };
                    inst.m_vec = Some((0..len).map(|_| rng.random_range(0..=b.m)).collect());
                    continue;
                }
                ShapeKey::LVec => {
                    inst.l_vec = Some((0..k).map(|_| rng.random_range(1..=b.l)).collect());
                    continue;
                }
                ShapeKey::Trunc => continue,
            };
            inst = inst.with(key, v);
        }
    }
    // `mv` is declared before `r` in some schemas; fix its length now.
    if matches!(id, C2_14 | C2_15) {
        let len = inst.r.unwrap_or(k) as usize;
        let mut mv = inst.m_vec.take().unwrap_or_default();
        mv.resize(len, 0);
        inst.m_vec = Some(mv);
    }

    match entry.backend {
        Backend::Exact => {
            for p in entry.params {
                match *p {
                    Param::Sym(Symbol::Q) => {
                        let mut q = any_rational(rng);
                        while q.is_zero() || q.abs().is_one() {
                            q = any_rational(rng);
                        }
                        inst.env.set(Symbol::Q, q);
                    }
                    Param::Sym(s) => inst.env.set(s, any_rational(rng)),
                    Param::ZVec => {
                        inst.env.z_vec = Some((0..k).map(|_| any_rational(rng)).collect());
                    }
                    Param::Shape(_) => {}
                }
            }
        }
        Backend::Numeric => {
            inst.env.set(Symbol::Q, small_base(rng));
            for p in entry.params {
                match *p {
                    Param::Sym(Symbol::Q) => {}
                    Param::Sym(Symbol::A) => {
                        let v = if id == N2_16 { rat(rng.random_range(1..=4 * i64::from(b.n)), 4) } else { any_rational(rng) };
                        inst.env.set(Symbol::A, v);
                    }
                    Param::Sym(s) => inst.env.set(s, unit_rational(rng)),
                    _ => {}
                }
            }
        }
        Backend::ExactTail => {
            // q in (-1/2, 1/2) \ {0}; z = 1 + delta with the ratio below 1/2.
            let mut q = unit_rational(rng) / int(2);
            while q.is_zero() {
                q = unit_rational(rng) / int(2);
            }
            let one = int(1);
            let big_a = match id {
                NB3 => {
                    let qi = q.powi(i64::from(inst.i.unwrap_or(1)))?;
                    qi.div(&(one.clone() - qi.clone()))?.abs()
                }
                _ => {
                    let (lo, hi) = (i64::from(inst.i.unwrap_or(1)), i64::from(n));
                    let mut best = int(0);
                    for s in lo..=hi {
                        let qs = q.powi(s)?;
                        let den = one.clone() - qs.clone();
                        let v = if id == L3_2 { den.inv()? } else { qs.div(&den)? }.abs();
                        if v > best {
                            best = v;
                        }
                    }
                    best
                }
            };
            let delta = unit_rational(rng) / (int(2) * big_a);
            inst.env.set(Symbol::Q, q);
            inst.env.set(Symbol::Z, one + delta);
        }
    }
    Ok(inst)
}

/// Deterministic in `(id, seed)`; resamples until the instance is valid and
/// pole-free, up to `bounds.retries` attempts.
pub fn random_instance(id: IdentityId, seed: u64, bounds: &Bounds) -> Result<IdentityInstance> {
    bounds.validate()?;
    let mut rng = rng_for(id.as_str(), seed);
    for _ in 0..bounds.retries {
        let inst = draw(id, &mut rng, bounds)?;
        let window = i64::from(inst.n.unwrap_or(bounds.n) + inst.k.unwrap_or(0) + inst.m.unwrap_or(0) + 1);
        if inst.validate().is_ok() && check_poles(&inst).is_ok() && conservative(&inst, window) {
            return Ok(inst);
        }
    }
    Err(Error::Exhausted(bounds.retries))
}
