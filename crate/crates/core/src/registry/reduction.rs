//! Special-case reductions between registered identities.
//!
//! Each reduction draws a random instance of the *target* identity, builds
//! the source instance(s) that specialise to it, and compares the source's
//! sides (after the mapping) with the target's sides. All four values must
//! agree exactly.
//!
//! Several source/target pairs only line up after a base inversion or a
//! difference in `x`, e.g. the x-weighted sum at base `q` is the difference
//! of two multi-exponent sums at base `1/q`; those mappings are spelled out
//! in [`Reduction::sources`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{format_rational, int, ExactScalar, Field};
use crate::params::Symbol;
use crate::qcore::q_pochhammer;

use super::errata::Reading;
use super::eval::{eval_pair, EvalOptions, Vals};
use super::laurent::Laurent;
use super::poles::check_poles;
use super::random::{random_instance, Bounds};
use super::verify::{instance_text, Outcome, SideValue, VerificationReport};
use super::{IdentityId, IdentityInstance, ShapeKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reduction {
    /// All exponents zero in the multi-exponent sum gives the x-weighted sum.
    TaToFl,
    /// One level at `x = 1` gives the inverted nested Lambert sum.
    TaToP,
    /// One level of the multi-parameter sum is the single-level z kernel.
    PbToC34,
    /// The single-level z kernel against the z-deformed nested sum.
    Z15ToC34,
    /// `l = 1`, `z = 1/y` of the single-level kernel gives the w-y sum.
    C34ToFl35,
    /// Residue at `t = 1` of the z-t nested sum.
    PcToGz,
}

impl Reduction {
    pub const ALL: [Reduction; 6] =
        [Reduction::TaToFl, Reduction::TaToP, Reduction::PbToC34, Reduction::Z15ToC34, Reduction::C34ToFl35, Reduction::PcToGz];

    pub fn source(self) -> IdentityId {
        match self {
            Reduction::TaToFl | Reduction::TaToP => IdentityId::TA1_8,
            Reduction::PbToC34 => IdentityId::PB1_11,
            Reduction::Z15ToC34 => IdentityId::Z1_5,
            Reduction::C34ToFl35 => IdentityId::C3_4,
            Reduction::PcToGz => IdentityId::PC1_12,
        }
    }

    pub fn target(self) -> IdentityId {
        match self {
            Reduction::TaToFl => IdentityId::FL1_4,
            Reduction::TaToP => IdentityId::P1_3,
            Reduction::PbToC34 | Reduction::Z15ToC34 => IdentityId::C3_4,
            Reduction::C34ToFl35 => IdentityId::FL3_5,
            Reduction::PcToGz => IdentityId::GZ1_6,
        }
    }

    pub fn name(self) -> String {
        format!("{}->{}", self.source(), self.target())
    }

    /// Linear combination `prefactor * sum c_j * side(source_j)` that should
    /// equal the target's sides. Not used for [`Reduction::PcToGz`], which
    /// takes a limit instead.
    fn sources(self, target: &IdentityInstance) -> Result<(ExactScalar, Vec<(ExactScalar, IdentityInstance)>)> {
        let q = target.env.require(Symbol::Q)?.clone();
        let n = target.need(ShapeKey::N)? as u32;
        let src = || IdentityInstance::new(self.source()).with(ShapeKey::N, n);
        let one = int(1);
        match self {
            Reduction::TaToFl => {
                // FL(q, x) = (-1)^m [T(1/q; x = 1) - T(1/q; x = -x)].
                let m = target.need(ShapeKey::M)? as u32;
                let x = target.env.require(Symbol::X)?.clone();
                let base = src().with(ShapeKey::K, m).with_m_vec(vec![0; m as usize]).with_sym(Symbol::Q, q.inv()?);
                let sign = int(if m.is_multiple_of(2) { 1 } else { -1 });
                Ok((
                    sign,
                    vec![(one.clone(), base.clone().with_sym(Symbol::X, one)), (int(-1), base.with_sym(Symbol::X, -x))],
                ))
            }
            Reduction::TaToP => {
                // One level with exponent m - 1 at x = 1.
                let m = target.need(ShapeKey::M)? as u32;
                let s = src().with(ShapeKey::K, 1).with_m_vec(vec![m - 1]).with_sym(Symbol::Q, q).with_sym(Symbol::X, one.clone());
                Ok((one.clone(), vec![(one, s)]))
            }
            Reduction::PbToC34 => {
                let l = target.need(ShapeKey::L)? as u32;
                let s = src()
                    .with(ShapeKey::K, 1)
                    .with_l_vec(vec![l])
                    .with_sym(Symbol::Q, q)
                    .with_sym(Symbol::X, target.env.require(Symbol::X)?.clone())
                    .with_z_vec(vec![target.env.require(Symbol::Z)?.clone()]);
                Ok((one.clone(), vec![(one, s)]))
            }
            Reduction::Z15ToC34 => {
                // C(q) = (-1)^l z^n (q/z;q)_n/(q;q)_n [Z(1/q; x = 1) - Z(1/q; x)].
                let l = target.need(ShapeKey::L)?;
                let x = target.env.require(Symbol::X)?.clone();
                let z = target.env.require(Symbol::Z)?.clone();
                let base = src().with(ShapeKey::M, l as u32).with_sym(Symbol::Q, q.inv()?).with_sym(Symbol::Z, z.clone());
                let pre = z.powi(i64::from(n))? * q_pochhammer(&q.div(&z)?, &q, n)
                    / q_pochhammer(&q, &q, n)
                    * int(if l % 2 == 0 { 1 } else { -1 });
                Ok((pre, vec![(one.clone(), base.clone().with_sym(Symbol::X, one)), (int(-1), base.with_sym(Symbol::X, x))]))
            }
            Reduction::C34ToFl35 => {
                // FL3.5 = y^(n-1) (q;q)_n/(yq;q)_n [C(x = 0) - C(x = w)] at l = 1, z = 1/y.
                let y = target.env.require(Symbol::Y)?.clone();
                let w = target.env.require(Symbol::W)?.clone();
                let base = src().with(ShapeKey::L, 1).with_sym(Symbol::Q, q.clone()).with_sym(Symbol::Z, y.inv()?);
                let pre = y.powi(i64::from(n) - 1)? * q_pochhammer(&q, &q, n) / q_pochhammer(&(y * q.clone()), &q, n);
                Ok((pre, vec![(one.clone(), base.clone().with_sym(Symbol::X, int(0))), (int(-1), base.with_sym(Symbol::X, w))]))
            }
            Reduction::PcToGz => Err(Error::schema("the t = 1 residue has no linear source form")),
        }
    }

    /// Source sides under the mapping.
    fn source_sides(self, target: &IdentityInstance, opts: EvalOptions) -> Result<(Vec<IdentityInstance>, ExactScalar, ExactScalar)> {
        let unit = int(1);
        if self == Reduction::PcToGz {
            // (1 - t) * side at t = 1 + eps, constant term.
            let m = target.need(ShapeKey::M)? as u32;
            let src = IdentityInstance::new(IdentityId::PC1_12)
                .with(ShapeKey::N, target.need(ShapeKey::N)? as u32)
                .with(ShapeKey::K, m)
                .with_sym(Symbol::Q, target.env.require(Symbol::Q)?.clone())
                .with_sym(Symbol::Z, target.env.require(Symbol::Z)?.clone())
                .with_sym(Symbol::T, unit.clone());
            src.validate()?;
            let lu = Laurent::constant(unit.clone());
            let mut vals = Vals::from_env(&lu, &src.env);
            let t = Laurent::shifted(unit.clone());
            vals.set(Symbol::T, t.clone());
            let (l, r) = eval_pair(&src, &vals, opts)?;
            let factor = lu - t;
            return Ok((vec![src], (factor.clone() * l).regular_value()?, (factor * r).regular_value()?));
        }
        let (pre, terms) = self.sources(target)?;
        let mut l = int(0);
        let mut r = int(0);
        let mut insts = Vec::new();
        for (c, inst) in terms {
            inst.validate()?;
            check_poles(&inst)?;
            let (a, b) = eval_pair(&inst, &Vals::from_env(&unit, &inst.env), opts)?;
            l += c.clone() * a;
            r += c * b;
            insts.push(inst);
        }
        Ok((insts, pre.clone() * l, pre * r))
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Reduction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Reduction::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::schema(format!("unknown reduction `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub reduction: Reduction,
    pub target: IdentityInstance,
    pub sources: Vec<IdentityInstance>,
    /// Source left and right after the mapping.
    pub source_sides: (ExactScalar, ExactScalar),
    pub target_sides: (ExactScalar, ExactScalar),
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        let v = &self.source_sides.0;
        *v == self.source_sides.1 && *v == self.target_sides.0 && *v == self.target_sides.1
    }

    pub fn to_report(&self) -> VerificationReport {
        let mut r = VerificationReport::blank(&self.target, &format!("reduction {}", self.reduction), Reading::Corrected);
        r.lhs = Some(SideValue::exact(self.source_sides.0.clone()));
        r.rhs = Some(SideValue::exact(self.target_sides.0.clone()));
        r.equal = Some(self.passed());
        r.outcome = if self.passed() { Outcome::Pass } else { Outcome::Fail };
        let sources: Vec<String> = self.sources.iter().map(instance_text).collect();
        r.note = Some(format!(
            "source {} [{}]: lhs={} rhs={}; target rhs={}",
            self.reduction.source(),
            sources.join(" | "),
            format_rational(&self.source_sides.0),
            format_rational(&self.source_sides.1),
            format_rational(&self.target_sides.1),
        ));
        r
    }
}

/// Evaluate a reduction on a target instance.
pub fn reduction_check(red: Reduction, target: &IdentityInstance) -> Result<ReductionReport> {
    if target.id != red.target() {
        return Err(Error::schema(format!("{red} expects a {} instance, got {}", red.target(), target.id)));
    }
    target.validate()?;
    check_poles(target)?;
    let opts = EvalOptions::default();
    let unit = int(1);
    let target_sides = eval_pair(target, &Vals::from_env(&unit, &target.env), opts)?;
    let (sources, sl, sr) = red.source_sides(target, opts)?;
    Ok(ReductionReport { reduction: red, target: target.clone(), sources, source_sides: (sl, sr), target_sides })
}

/// A random target instance whose mapped sources are pole-free as well.
pub fn reduction_instance(red: Reduction, seed: u64, bounds: &Bounds) -> Result<IdentityInstance> {
    for attempt in 0..bounds.retries as u64 {
        let s = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(attempt);
        let target = random_instance(red.target(), s ^ fnv_tag(red), bounds)?;
        let ok = match red {
            Reduction::PcToGz => true,
            _ => red.sources(&target).is_ok_and(|(_, terms)| {
                terms.iter().all(|(_, inst)| inst.validate().is_ok() && check_poles(inst).is_ok())
            }),
        };
        if ok {
            return Ok(target);
        }
    }
    Err(Error::Exhausted(bounds.retries))
}

fn fnv_tag(red: Reduction) -> u64 {
    red.name().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}
