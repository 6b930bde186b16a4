//! One verification: evaluate both sides and decide the outcome.

use std::time::Instant;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, ExactScalar};
use crate::numeric::{eval_numeric_identity, probe_noninteger, BigReal, NumericConfig, NumericEvaluation};

use super::errata::{Errata, Reading};
use super::eval::{eval_pair, EvalOptions, Vals};
use super::nested::ChainOrder;
use super::poles::check_poles;
use super::tail::tail_sides;
use super::{entry_for, Backend, IdentityId, IdentityInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Mismatch explained by a recorded erratum under the printed reading.
    ExpectedFail,
    Error,
    /// Report-only evaluation with no pass/fail semantics.
    Exploratory,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::ExpectedFail => "expected-fail",
            Outcome::Error => "error",
            Outcome::Exploratory => "exploratory",
        }
    }
}

/// A side value as carried in reports: exact rationals keep full precision,
/// reals are frozen to decimal text with their working precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SideValue {
    Exact {
        #[serde(with = "rational_text")]
        value: ExactScalar,
    },
    Real {
        value: String,
        prec: usize,
    },
}

impl SideValue {
    pub fn exact(value: ExactScalar) -> Self {
        SideValue::Exact { value }
    }

    pub fn real(value: &BigReal) -> Self {
        SideValue::Real { value: value.to_decimal_string(), prec: value.precision() }
    }

    pub fn text(&self) -> String {
        match self {
            SideValue::Exact { value } => format_rational(value),
            SideValue::Real { value, .. } => value.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<&ExactScalar> {
        match self {
            SideValue::Exact { value } => Some(value),
            SideValue::Real { .. } => None,
        }
    }

    /// Magnitude as a float, for summaries.
    pub fn to_f64(&self) -> f64 {
        match self {
            SideValue::Exact { value } => {
                use num_traits::ToPrimitive;
                value.abs().to_f64().unwrap_or(f64::INFINITY)
            }
            SideValue::Real { value, .. } => value.parse::<f64>().map(f64::abs).unwrap_or(f64::NAN),
        }
    }
}

mod rational_text {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &ExactScalar, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(v))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<ExactScalar, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        ErrorInfo { kind: e.kind().to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub reading: Reading,
    #[serde(skip)]
    pub order: ChainOrder,
    pub numeric: NumericConfig,
    /// Record wall-clock time; off by default so that reports are
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { reading: Reading::Corrected, order: ChainOrder::default(), numeric: NumericConfig::default(), timing: false }
    }
}

impl VerifyOptions {
    pub fn eval(&self) -> EvalOptions {
        EvalOptions { reading: self.reading, order: self.order }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: IdentityId,
    /// What was run: `verify`, `reduction <name>` or `probe`.
    pub check: String,
    /// Instance echo in `key=value,...` form.
    pub instance: String,
    pub backend: Backend,
    pub reading: Reading,
    pub lhs: Option<SideValue>,
    pub rhs: Option<SideValue>,
    /// Exact mode only.
    pub equal: Option<bool>,
    pub residual: Option<SideValue>,
    pub tail_bound: Option<SideValue>,
    pub terms: Option<u64>,
    pub outcome: Outcome,
    pub error: Option<ErrorInfo>,
    /// Displays of the errata entries that bear on this id.
    pub errata: Vec<String>,
    pub elapsed_us: Option<u64>,
    pub note: Option<String>,
}

pub(crate) fn instance_text(inst: &IdentityInstance) -> String {
    inst.assignments().into_iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

fn citations(id: IdentityId) -> Vec<String> {
    Errata::bundled().affecting(id).map(|e| e.display.clone()).collect()
}

impl VerificationReport {
    pub(crate) fn blank(inst: &IdentityInstance, check: &str, reading: Reading) -> Self {
        VerificationReport {
            id: inst.id,
            check: check.to_string(),
            instance: instance_text(inst),
            backend: entry_for(inst.id).backend,
            reading,
            lhs: None,
            rhs: None,
            equal: None,
            residual: None,
            tail_bound: None,
            terms: None,
            outcome: Outcome::Error,
            error: None,
            errata: citations(inst.id),
            elapsed_us: None,
            note: None,
        }
    }

    /// Report for an evaluation that raised an error.
    pub fn from_error(inst: &IdentityInstance, check: &str, reading: Reading, err: &Error) -> Self {
        let mut r = Self::blank(inst, check, reading);
        r.error = Some(err.into());
        r
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

pub fn verify(inst: &IdentityInstance) -> Result<VerificationReport> {
    verify_with(inst, &VerifyOptions::default())
}

pub fn verify_with(inst: &IdentityInstance, opts: &VerifyOptions) -> Result<VerificationReport> {
    let start = Instant::now();
    inst.validate()?;
    let mut report = VerificationReport::blank(inst, "verify", opts.reading);
    let documented = opts.reading == Reading::Printed && Errata::bundled().has_printed_deviation(inst.id);
    let miss = if documented { Outcome::ExpectedFail } else { Outcome::Fail };
    match entry_for(inst.id).backend {
        Backend::Exact => {
            check_poles(inst)?;
            let unit = crate::field::int(1);
            let (l, r) = eval_pair(inst, &Vals::from_env(&unit, &inst.env), opts.eval())?;
            let equal = l == r;
            report.residual = Some(SideValue::exact((l.clone() - r.clone()).abs()));
            report.lhs = Some(SideValue::exact(l));
            report.rhs = Some(SideValue::exact(r));
            report.equal = Some(equal);
            report.outcome = if equal { Outcome::Pass } else { miss };
        }
        Backend::ExactTail => {
            check_poles(inst)?;
            let t = tail_sides(inst)?;
            let ok = t.within_bound();
            report.residual = Some(SideValue::exact((t.partial.clone() - t.rhs.clone()).abs()));
            report.tail_bound = Some(SideValue::exact(t.bound.clone()));
            report.terms = Some(u64::from(t.terms));
            report.lhs = Some(SideValue::exact(t.partial));
            report.rhs = Some(SideValue::exact(t.rhs));
            report.outcome = if ok { Outcome::Pass } else { miss };
        }
        Backend::Numeric => {
            let ev = eval_numeric_identity(inst, opts.reading, &opts.numeric)?;
            fill_numeric(&mut report, &ev);
            report.outcome = if ev.residual().to_f64() <= opts.numeric.tol { Outcome::Pass } else { miss };
        }
    }
    if opts.timing {
        report.elapsed_us = Some(start.elapsed().as_micros() as u64);
    }
    Ok(report)
}

fn fill_numeric(report: &mut VerificationReport, ev: &NumericEvaluation) {
    report.residual = Some(SideValue::real(&ev.residual()));
    report.tail_bound = Some(SideValue::real(&ev.tail_bound()));
    report.terms = Some(ev.k as u64);
    report.lhs = Some(SideValue::real(&ev.lhs.value));
    report.rhs = Some(SideValue::real(&ev.rhs.value));
}

/// Non-integer order probe; the outcome is always exploratory.
pub fn probe_report(inst: &IdentityInstance, a: &ExactScalar, opts: &VerifyOptions) -> Result<VerificationReport> {
    let start = Instant::now();
    let ev = probe_noninteger(inst, a, &opts.numeric)?;
    let mut report = VerificationReport::blank(inst, "probe", opts.reading);
    report.backend = Backend::Numeric;
    fill_numeric(&mut report, &ev);
    report.outcome = Outcome::Exploratory;
    report.note = Some(format!("exploratory: order a = {}", format_rational(a)));
    if opts.timing {
        report.elapsed_us = Some(start.elapsed().as_micros() as u64);
    }
    Ok(report)
}
