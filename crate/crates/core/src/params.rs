use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{format_rational, ExactScalar};

/// Every scalar symbol an identity can reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symbol {
    Q,
    X,
    Z,
    T,
    Y,
    W,
    /// Real-valued order for the non-integer re-interpretation, and the
    /// numerator parameter of the Heine series.
    A,
}

impl Symbol {
    pub const ALL: [Symbol; 7] = [Symbol::Q, Symbol::X, Symbol::Z, Symbol::T, Symbol::Y, Symbol::W, Symbol::A];

    pub fn name(self) -> &'static str {
        match self {
            Symbol::Q => "q",
            Symbol::X => "x",
            Symbol::Z => "z",
            Symbol::T => "t",
            Symbol::Y => "y",
            Symbol::W => "w",
            Symbol::A => "a",
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Symbol::ALL
            .into_iter()
            .find(|sym| sym.name() == s)
            .ok_or_else(|| Error::schema(format!("unknown symbol `{s}`")))
    }
}

/// Named assignment of the scalar symbols. Values are exact; the numeric
/// backend converts them at the requested precision.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamEnv {
    scalars: BTreeMap<Symbol, ExactScalar>,
    pub z_vec: Option<Vec<ExactScalar>>,
}

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, sym: Symbol, value: ExactScalar) -> Self {
        self.set(sym, value);
        self
    }

    pub fn with_z_vec(mut self, values: Vec<ExactScalar>) -> Self {
        self.z_vec = Some(values);
        self
    }

    pub fn set(&mut self, sym: Symbol, value: ExactScalar) {
        self.scalars.insert(sym, value);
    }

    pub fn get(&self, sym: Symbol) -> Option<&ExactScalar> {
        self.scalars.get(&sym)
    }

    pub fn require(&self, sym: Symbol) -> Result<&ExactScalar> {
        self.get(sym).ok_or_else(|| Error::schema(format!("missing parameter `{sym}`")))
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.scalars.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Symbol, &ExactScalar)> {
        self.scalars.iter().map(|(k, v)| (*k, v))
    }

    /// Human-readable `q=2/5;x=1/3` rendering used in reports.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self.iter().map(|(s, v)| format!("{s}={}", format_rational(v))).collect();
        if let Some(zs) = &self.z_vec {
            let joined: Vec<String> = zs.iter().map(format_rational).collect();
            parts.push(format!("zv={}", joined.join(":")));
        }
        parts.join(";")
    }
}
