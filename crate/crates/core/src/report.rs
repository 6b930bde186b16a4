//! Machine-readable report documents: canonical JSON and flat CSV.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::{Errata, Outcome, SideValue, VerificationReport};

pub const TOOL_NAME: &str = "qmultisum";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub expected_fail: usize,
    pub error: usize,
    pub exploratory: usize,
    /// Largest residual magnitude among the reports, as reported.
    pub max_residual: Option<SideValue>,
}

impl Summary {
    pub fn of(reports: &[VerificationReport]) -> Self {
        let mut s = Summary { total: reports.len(), ..Default::default() };
        let mut best = f64::NEG_INFINITY;
        for r in reports {
            match r.outcome {
                Outcome::Pass => s.pass += 1,
                Outcome::Fail => s.fail += 1,
                Outcome::ExpectedFail => s.expected_fail += 1,
                Outcome::Error => s.error += 1,
                Outcome::Exploratory => s.exploratory += 1,
            }
            if let Some(res) = &r.residual {
                let v = res.to_f64();
                if v > best {
                    best = v;
                    s.max_residual = Some(res.clone());
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub display: String,
    pub printed: String,
    pub corrected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    /// Echo of the run configuration, key by key.
    pub config: BTreeMap<String, String>,
    pub reports: Vec<VerificationReport>,
    pub summary: Summary,
    /// Errata entries that bear on at least one reported id.
    pub errata: Vec<Citation>,
}

impl ReportDocument {
    pub fn new(config: BTreeMap<String, String>, reports: Vec<VerificationReport>) -> Self {
        let cited: BTreeSet<&str> = reports.iter().flat_map(|r| r.errata.iter().map(String::as_str)).collect();
        let errata = Errata::bundled()
            .entries
            .iter()
            .filter(|e| cited.contains(e.display.as_str()))
            .map(|e| Citation { display: e.display.clone(), printed: e.printed.clone(), corrected: e.corrected.clone() })
            .collect();
        ReportDocument {
            tool: TOOL_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            summary: Summary::of(&reports),
            reports,
            errata,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0 && self.summary.error == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::schema(format!("malformed report: {e}")))
    }

    /// One row per report; values that may contain commas are quoted.
    pub fn to_csv(&self) -> String {
        let header = [
            "id", "check", "instance", "backend", "reading", "lhs", "rhs", "equal", "residual", "tail_bound", "terms",
            "outcome", "error", "errata", "elapsed_us",
        ];
        let mut out = header.join(",");
        out.push('\n');
        let opt = |v: &Option<SideValue>| v.as_ref().map(SideValue::text).unwrap_or_default();
        for r in &self.reports {
            let fields = [
                r.id.to_string(),
                r.check.clone(),
                r.instance.clone(),
                r.backend.as_str().to_string(),
                match r.reading {
                    crate::registry::Reading::Corrected => "corrected".to_string(),
                    crate::registry::Reading::Printed => "printed".to_string(),
                },
                opt(&r.lhs),
                opt(&r.rhs),
                r.equal.map(|b| b.to_string()).unwrap_or_default(),
                opt(&r.residual),
                opt(&r.tail_bound),
                r.terms.map(|t| t.to_string()).unwrap_or_default(),
                r.outcome.as_str().to_string(),
                r.error.as_ref().map(|e| format!("{}: {}", e.kind, e.message)).unwrap_or_default(),
                r.errata.join("; "),
                r.elapsed_us.map(|t| t.to_string()).unwrap_or_default(),
            ];
            let row: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{verify, IdentityId, IdentityInstance};

    fn doc() -> ReportDocument {
        let reports = ["n=2,m=1,q=1/2", "n=3,m=2,q=-2/7"]
            .iter()
            .map(|t| verify(&IdentityInstance::parse_assignments(IdentityId::D1_1, t).unwrap()).unwrap())
            .collect();
        let config = BTreeMap::from([("command".to_string(), "verify".to_string())]);
        ReportDocument::new(config, reports)
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let d = doc();
        let text = d.to_json();
        let back = ReportDocument::from_json(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"4/3\""));
    }

    #[test]
    fn csv_has_one_row_per_report() {
        let d = doc();
        let csv = d.to_csv();
        assert_eq!(csv.lines().count(), 1 + d.reports.len());
        assert!(csv.lines().nth(1).unwrap().starts_with("D1.1,verify,\"n=2,m=1,q=1/2\""));
    }

    #[test]
    fn summary_counts() {
        let d = doc();
        assert_eq!(d.summary.pass, 2);
        assert!(d.all_passed());
        assert_eq!(d.summary.max_residual.as_ref().unwrap().text(), "0/1");
    }
}
