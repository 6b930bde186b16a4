use std::collections::BTreeMap;
use std::fmt;

use qmultisum::field::{format_rational, parse_rational};
use qmultisum::registry::{
    entry_for, entries_in_section, probe_report, random_instance, reduction_check, reduction_instance, registry,
    Bounds, Outcome, Reading, Reduction, RegistryEntry,
};
use qmultisum::{Error, IdentityId, IdentityInstance, NumericConfig, ReportDocument, VerificationReport, VerifyOptions};
use rayon::prelude::*;

use crate::{Command, Common, Format};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Schema(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::List { section, format, out } => list(section.as_deref(), format, out.as_deref()),
        Command::Verify { id, set, reduction, common } => verify(&id, &set, reduction.as_deref(), &common),
        Command::Sweep { id, seed, trials, bounds, threads, common } => {
            sweep(&id, seed, trials, &bounds, threads, &common)
        }
        Command::Probe { id, a, q, x, z, t, set, common } => {
            let overrides = [("q", q), ("x", x), ("z", z), ("t", t)];
            probe(&id, &a, &set, &overrides, &common)
        }
    }
}

fn emit(text: &str, out: Option<&str>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(doc: &ReportDocument, common: &Common) -> Result<()> {
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => doc.to_json(),
        Format::Csv => doc.to_csv(),
    };
    emit(&text, common.out.as_deref())
}

fn options(common: &Common) -> Result<VerifyOptions> {
    let mut numeric = NumericConfig::default();
    if let Some(p) = common.prec {
        numeric = numeric.with_prec(p);
    }
    if let Some(k) = common.k {
        numeric = numeric.with_terms(k).fixed();
    }
    if let Some(t) = common.tol {
        numeric = numeric.with_tol(t);
    }
    numeric.validate()?;
    Ok(VerifyOptions {
        reading: if common.strict_printed { Reading::Printed } else { Reading::Corrected },
        numeric,
        timing: common.timing,
        ..Default::default()
    })
}

fn base_config(command: &str, common: &Common, opts: &VerifyOptions) -> BTreeMap<String, String> {
    let mut c = BTreeMap::new();
    c.insert("command".into(), command.into());
    c.insert("prec".into(), opts.numeric.prec.to_string());
    c.insert("K".into(), common.k.map_or_else(|| "auto".into(), |k| k.to_string()));
    c.insert("tol".into(), format!("{:e}", opts.numeric.tol));
    c.insert("strict_printed".into(), common.strict_printed.to_string());
    c
}

/// Exit code for a finished document: any genuine mismatch is 1, otherwise
/// any evaluation error is 3.
fn exit_for(doc: &ReportDocument) -> u8 {
    if doc.summary.fail > 0 {
        1
    } else if doc.summary.error > 0 {
        3
    } else {
        0
    }
}

fn list(section: Option<&str>, format: Option<Format>, out: Option<&str>) -> Result<u8> {
    let entries: Vec<&RegistryEntry> = match section {
        Some(s) => entries_in_section(s),
        None => registry().iter().collect(),
    };
    let text = match format {
        None => {
            let mut s = String::new();
            for e in &entries {
                s += &format!(
                    "{:<7} {:<7} section {}  {:<10} [{}]  {}\n",
                    e.id.as_str(),
                    e.equation,
                    e.section,
                    e.backend.as_str(),
                    e.param_names().join(", "),
                    e.title
                );
            }
            s
        }
        Some(Format::Json) => {
            let rows: Vec<_> = entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "id": e.id.as_str(),
                        "equation": e.equation,
                        "section": e.section,
                        "backend": e.backend.as_str(),
                        "params": e.param_names(),
                        "title": e.title,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&rows).expect("listing serializes");
            s.push('\n');
            s
        }
        Some(Format::Csv) => {
            let mut s = String::from("id,equation,section,backend,params,title\n");
            for e in &entries {
                s += &format!(
                    "{},{},{},{},{},\"{}\"\n",
                    e.id.as_str(),
                    e.equation,
                    e.section,
                    e.backend.as_str(),
                    e.param_names().join(":"),
                    e.title
                );
            }
            s
        }
    };
    emit(&text, out)?;
    Ok(0)
}

fn parse_id(text: &str) -> Result<IdentityId> {
    Ok(text.parse::<IdentityId>()?)
}

fn verify(id: &str, set: &str, reduction: Option<&str>, common: &Common) -> Result<u8> {
    let opts = options(common)?;
    let inst = IdentityInstance::parse_assignments(parse_id(id)?, set)?;
    let report = match reduction {
        Some(name) => {
            let red: Reduction = name.parse()?;
            reduction_check(red, &inst)?.to_report()
        }
        None => qmultisum::verify_with(&inst, &opts)?,
    };
    let mut config = base_config("verify", common, &opts);
    config.insert("id".into(), inst.id.to_string());
    config.insert("set".into(), set.into());
    if let Some(r) = reduction {
        config.insert("reduction".into(), r.into());
    }
    let doc = ReportDocument::new(config, vec![report]);
    render(&doc, common)?;
    Ok(exit_for(&doc))
}

enum Job {
    Identity(IdentityId),
    Reduction(Reduction),
}

fn sweep(id: &str, seed: u64, trials: u64, bounds: &str, threads: Option<usize>, common: &Common) -> Result<u8> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let opts = options(common)?;
    let b = Bounds::parse(bounds)?;
    let jobs: Vec<Job> = if id.trim().eq_ignore_ascii_case("all") {
        IdentityId::ALL.iter().map(|i| Job::Identity(*i)).chain(Reduction::ALL.iter().map(|r| Job::Reduction(*r))).collect()
    } else {
        vec![Job::Identity(parse_id(id)?)]
    };
    let work: Vec<(&Job, u64)> = jobs.iter().flat_map(|j| (0..trials).map(move |t| (j, t))).collect();
    let run_one = |(job, t): &(&Job, u64)| -> VerificationReport {
        let s = seed.wrapping_add(*t);
        match job {
            Job::Identity(id) => match random_instance(*id, s, &b) {
                Ok(inst) => qmultisum::verify_with(&inst, &opts)
                    .unwrap_or_else(|e| VerificationReport::from_error(&inst, "verify", opts.reading, &e)),
                Err(e) => VerificationReport::from_error(&IdentityInstance::new(*id), "verify", opts.reading, &e),
            },
            Job::Reduction(red) => {
                let check = format!("reduction {red}");
                match reduction_instance(*red, s, &b) {
                    Ok(target) => reduction_check(*red, &target)
                        .map(|r| r.to_report())
                        .unwrap_or_else(|e| VerificationReport::from_error(&target, &check, Reading::Corrected, &e)),
                    Err(e) => {
                        VerificationReport::from_error(&IdentityInstance::new(red.target()), &check, Reading::Corrected, &e)
                    }
                }
            }
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    // Indexed parallel collect keeps trial order regardless of scheduling.
    let reports: Vec<VerificationReport> = pool.install(|| work.par_iter().map(run_one).collect());

    let mut config = base_config("sweep", common, &opts);
    config.insert("id".into(), id.trim().into());
    config.insert("seed".into(), seed.to_string());
    config.insert("trials".into(), trials.to_string());
    config.insert("bounds".into(), format!("n={},k={},m={},l={},retries={}", b.n, b.k, b.m, b.l, b.retries));
    let doc = ReportDocument::new(config, reports);
    render(&doc, common)?;
    Ok(exit_for(&doc))
}

/// Parameters used when the command line leaves them out.
fn probe_defaults(id: IdentityId) -> Result<&'static str> {
    match id {
        IdentityId::PB1_11 => Ok("k=1,lv=1,zv=1/3,q=1/2,x=1/3"),
        IdentityId::PC1_12 => Ok("k=2,q=1/2,z=1/3,t=1/5"),
        IdentityId::N2_16 => Ok("q=1/2,x=1/3"),
        other => Err(CliError::Usage(format!("probe supports PB1.11, PC1.12 and N2.16, not {other}"))),
    }
}

fn probe(id: &str, grid: &[String], set: &str, overrides: &[(&str, Option<String>)], common: &Common) -> Result<u8> {
    let opts = options(common)?;
    let id = parse_id(id)?;
    let mut inst = IdentityInstance::parse_assignments(id, probe_defaults(id)?)?;
    for part in set.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value, got `{part}`")))?;
        inst.assign(k.trim(), v.trim())?;
    }
    for (key, value) in overrides {
        if let Some(v) = value {
            if !entry_for(id).param_names().contains(key) {
                return Err(CliError::Usage(format!("{id} has no parameter `{key}`")));
            }
            inst.assign(key, v)?;
        }
    }
    let mut reports = Vec::new();
    for a_text in grid {
        let a = parse_rational(a_text)?;
        let mut report = probe_report(&inst, &a, &opts)?;
        if let Some(note) = exact_cross_check(&inst, &a, &report, &opts) {
            report.note = Some(format!("{}; {note}", report.note.unwrap_or_default()));
        }
        reports.push(report);
    }
    let mut config = base_config("probe", common, &opts);
    config.insert("id".into(), id.to_string());
    config.insert("instance".into(), reports.first().map(|r| r.instance.clone()).unwrap_or_default());
    config.insert("a".into(), grid.iter().map(|a| a.trim()).collect::<Vec<_>>().join(","));
    let doc = ReportDocument::new(config, reports);
    render(&doc, common)?;
    Ok(0)
}

/// At a positive integer order the exact backend applies; report how far
/// the probe's left side is from it.
fn exact_cross_check(inst: &IdentityInstance, a: &qmultisum::ExactScalar, report: &VerificationReport, opts: &VerifyOptions) -> Option<String> {
    use num_traits::{Signed, ToPrimitive};
    if inst.id == IdentityId::N2_16 || !a.is_integer() {
        return None;
    }
    let n = a.to_integer().to_u32().filter(|&n| n >= 1)?;
    let exact = inst.clone().with(qmultisum::registry::ShapeKey::N, n);
    let r = qmultisum::verify_with(&exact, opts).ok()?;
    if r.outcome != Outcome::Pass {
        return Some(format!("exact backend at n={n}: {}", r.outcome.as_str()));
    }
    let lhs = r.lhs.as_ref()?.as_rational()?.clone();
    let probe_lhs = parse_rational(&report.lhs.as_ref()?.text()).ok()?;
    let dev = (probe_lhs - &lhs).abs().to_f64().unwrap_or(f64::INFINITY);
    Some(format!("exact backend at n={n}: lhs={}, |probe - exact| = {dev:.3e}", format_rational(&lhs)))
}
