//! Printed-versus-verified discrepancies, loaded from the bundled TOML file.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::IdentityId;

const ERRATA_TOML: &str = include_str!("../../data/errata.toml");

/// Which form of a display to evaluate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    /// Errata applied; the default.
    #[default]
    Corrected,
    /// Literal printed form, for `--strict-printed` runs.
    Printed,
}

/// Meaning given to a bracket coefficient `[n]`, `[n]_i` or `[n][i]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Notation {
    #[default]
    Gauss,
    /// `[n]` read as the q-number of `n`.
    QNumber,
    /// `[n][i]` read as the product of two q-numbers.
    QNumberProduct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrataKind {
    Typo,
    Notation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrataEntry {
    pub display: String,
    pub kind: ErrataKind,
    #[serde(default)]
    pub notation: Option<Notation>,
    #[serde(default)]
    pub affects: Vec<String>,
    pub printed: String,
    pub corrected: String,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Errata {
    pub version: u32,
    #[serde(rename = "entry")]
    pub entries: Vec<ErrataEntry>,
}

impl Errata {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// The bundled errata file.
    pub fn bundled() -> &'static Errata {
        static CELL: OnceLock<Errata> = OnceLock::new();
        CELL.get_or_init(|| Errata::parse(ERRATA_TOML).expect("bundled errata file parses"))
    }

    pub fn raw_text() -> &'static str {
        ERRATA_TOML
    }

    /// Entries whose printed form changes the evaluation of `id`.
    pub fn affecting(&self, id: IdentityId) -> impl Iterator<Item = &ErrataEntry> {
        self.entries.iter().filter(move |e| e.affects.iter().any(|a| a == id.as_str()))
    }

    /// Bracket reading for `id` under the given reading.
    pub fn notation(&self, id: IdentityId, reading: Reading) -> Notation {
        match reading {
            Reading::Corrected => Notation::Gauss,
            Reading::Printed => self.affecting(id).find_map(|e| e.notation).unwrap_or(Notation::Gauss),
        }
    }

    pub fn has_printed_typo(&self, id: IdentityId) -> bool {
        self.affecting(id).any(|e| e.kind == ErrataKind::Typo)
    }

    /// Whether the printed reading of `id` differs from the corrected one
    /// at all, by a typo or by a bracket convention.
    pub fn has_printed_deviation(&self, id: IdentityId) -> bool {
        self.affecting(id).next().is_some()
    }
}
