//! `qmultisum`: list, verify, sweep and probe registered identities.

mod run;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qmultisum", version, about = "Verify multiple-sum q-series identities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List registry entries, optionally only those of one section.
    List {
        /// Section number, e.g. `3`. Unknown sections list nothing.
        #[arg(long)]
        section: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Verify one explicit instance.
    Verify {
        #[arg(long)]
        id: String,
        /// Parameters as `k=v,...`; rationals are `p/q` or decimal text,
        /// vectors use `:` (e.g. `mv=1:2`).
        #[arg(long, default_value = "")]
        set: String,
        /// Check a reduction onto this (target) instance instead.
        #[arg(long)]
        reduction: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Verify seeded random instances.
    Sweep {
        /// Identity id, or `all` for every id plus every reduction.
        #[arg(long, default_value = "all")]
        id: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        /// Size caps such as `n=6,k=3`.
        #[arg(long, default_value = "")]
        bounds: String,
        /// Worker threads; the report does not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the real-order continuation at one or more orders `a`.
    Probe {
        #[arg(long)]
        id: String,
        /// Orders, comma separated.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        a: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        /// Remaining parameters as `k=v,...`.
        #[arg(long, default_value = "")]
        set: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Working precision in bits for numeric evaluation.
    #[arg(long)]
    pub prec: Option<usize>,
    /// Fixed truncation for numeric evaluation (disables auto-extension).
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Residual tolerance for numeric evaluation.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Use the printed forms; documented mismatches become expected failures.
    #[arg(long)]
    pub strict_printed: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<String>,
    /// Record wall-clock time per report (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qmultisum: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
