//! Catalogue of identities with independent evaluators for both sides.

mod eval;
pub mod errata;
mod instance;
mod laurent;
pub mod nested;
mod poles;
mod random;
mod reduction;
mod tail;
mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Symbol;

pub use errata::{Errata, ErrataEntry, Notation, Reading};
pub use eval::{eval_pair, eval_side, EvalOptions, Side, Vals};
pub use instance::{IdentityInstance, ShapeKey};
pub use nested::{chain_sum, nested_qsum, ChainOrder, Level};
pub use poles::check_poles;
pub use random::{random_instance, Bounds};
pub use reduction::{reduction_check, reduction_instance, Reduction, ReductionReport};
pub use tail::{tail_sides, TailEvaluation, DEFAULT_TRUNCATION};
pub use laurent::Laurent;
pub use random::PARAM_HEIGHT;
pub use verify::{probe_report, verify, verify_with, ErrorInfo, Outcome, SideValue, VerificationReport, VerifyOptions};

macro_rules! identity_ids {
    ($($variant:ident => $text:literal),* $(,)?) => {
        /// Identifier of a registered identity.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum IdentityId {
            $($variant),*
        }

        impl IdentityId {
            pub const ALL: &'static [IdentityId] = &[$(IdentityId::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(IdentityId::$variant => $text),*
                }
            }
        }
    };
}

identity_ids! {
    D1_1 => "D1.1",
    K1_2 => "K1.2",
    P1_3 => "P1.3",
    FL1_4 => "FL1.4",
    Z1_5 => "Z1.5",
    GZ1_6 => "GZ1.6",
    TA1_8 => "TA1.8",
    TA1_9 => "TA1.9",
    C2_14 => "C2.14",
    C2_15 => "C2.15",
    N2_16 => "N2.16",
    L3_1 => "L3.1",
    L3_2 => "L3.2",
    NB3 => "NB3",
    PB1_10 => "PB1.10",
    PB1_11 => "PB1.11",
    C3_3 => "C3.3",
    C3_4 => "C3.4",
    FL3_5 => "FL3.5",
    P3_6 => "P3.6",
    A3_7 => "A3.7",
    A3_8 => "A3.8",
    A3_9 => "A3.9",
    C3_10 => "C3.10",
    P4_1 => "P4.1",
    S4_2 => "S4.2",
    S4_3 => "S4.3",
    S4_4 => "S4.4",
    S4_5 => "S4.5",
    E4_7 => "E4.7",
    PC1_12 => "PC1.12",
    C4_8 => "C4.8",
    HEINE => "HEINE",
    PFRAC => "PFRAC",
    FINE => "FINE",
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::schema(format!("unknown identity `{s}`")))
    }
}

impl Serialize for IdentityId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for IdentityId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Both sides are finite rational expressions; equality is exact.
    Exact,
    /// One side is a convergent series, summed to `R` terms with a rigorous
    /// remainder bound.
    ExactTail,
    /// Infinite sums or products evaluated in high-precision floating point.
    Numeric,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::ExactTail => "exact+tail",
            Backend::Numeric => "numeric",
        }
    }
}

/// One schema slot of an identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Shape(ShapeKey),
    Sym(Symbol),
    ZVec,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Shape(k) => k.name(),
            Param::Sym(s) => s.name(),
            Param::ZVec => "zv",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RegistryEntry {
    pub id: IdentityId,
    /// Display tag used by the source, e.g. `(1.8)`.
    pub equation: &'static str,
    pub section: u8,
    pub title: &'static str,
    pub backend: Backend,
    pub params: &'static [Param],
}

impl RegistryEntry {
    pub fn requires(&self, p: Param) -> bool {
        self.params.contains(&p)
    }

    pub fn param_names(&self) -> Vec<&'static str> {
        self.params.iter().map(|p| p.name()).collect()
    }
}

use Param::{Shape as S, Sym as Y};
use ShapeKey::{I, K, L, LVec, MVec, M, N, R, Trunc};
use Symbol::{A as SA, Q, T, W, X, Y as SY, Z};

const fn entry(
    id: IdentityId,
    equation: &'static str,
    section: u8,
    title: &'static str,
    backend: Backend,
    params: &'static [Param],
) -> RegistryEntry {
    RegistryEntry { id, equation, section, title, backend, params }
}

static TABLE: &[RegistryEntry] = &[
    entry(IdentityId::D1_1, "(1.1)", 1, "nested Lambert sum as a Gaussian-binomial sum", Backend::Exact, &[S(N), S(M), Y(Q)]),
    entry(IdentityId::K1_2, "(1.2)", 1, "Lambert series as an alternating q-series", Backend::Numeric, &[Y(Q)]),
    entry(IdentityId::P1_3, "(1.3)", 1, "inverted nested Lambert sum", Backend::Exact, &[S(N), S(M), Y(Q)]),
    entry(IdentityId::FL1_4, "(1.4)", 1, "nested sum with an x-weighted last index", Backend::Exact, &[S(N), S(M), Y(Q), Y(X)]),
    entry(IdentityId::Z1_5, "(1.5)", 1, "nested sum with a z-deformed kernel", Backend::Exact, &[S(N), S(M), Y(Q), Y(X), Y(Z)]),
    entry(IdentityId::GZ1_6, "(1.6)", 1, "nested sum with level-shifted z poles", Backend::Exact, &[S(N), S(M), Y(Q), Y(Z)]),
    entry(IdentityId::TA1_8, "(1.8)", 1, "multi-exponent nested sum, x^i form", Backend::Exact, &[S(N), S(K), S(MVec), Y(Q), Y(X)]),
    entry(IdentityId::TA1_9, "(1.9)", 1, "multi-exponent nested sum, (x;q)_i form", Backend::Exact, &[S(N), S(K), S(MVec), Y(Q), Y(X)]),
    entry(IdentityId::C2_14, "(2.14)", 2, "grouped-exponent specialisation, (x;q)_i form", Backend::Exact, &[S(N), S(R), S(MVec), Y(Q), Y(X)]),
    entry(IdentityId::C2_15, "(2.15)", 2, "grouped-exponent specialisation, x^i form", Backend::Exact, &[S(N), S(R), S(MVec), Y(Q), Y(X)]),
    entry(IdentityId::N2_16, "(2.16)", 2, "non-integer order instance of the (x;q)_i form", Backend::Numeric, &[Y(SA), Y(Q), Y(X)]),
    entry(IdentityId::L3_1, "(3.1)", 3, "binomial resummation of complete symmetric functions", Backend::ExactTail, &[S(I), S(N), S(K), Y(Z), Y(Q), S(Trunc)]),
    entry(IdentityId::L3_2, "(3.2)", 3, "binomial resummation at inverted base", Backend::ExactTail, &[S(I), S(N), S(K), Y(Z), Y(Q), S(Trunc)]),
    entry(IdentityId::NB3, "NB3", 3, "negative-binomial resummation of a power kernel", Backend::ExactTail, &[S(I), S(L), Y(Z), Y(Q), S(Trunc)]),
    entry(IdentityId::PB1_10, "(1.10)", 1, "multi-parameter nested sum, 1 - x^i form", Backend::Exact, &[S(N), S(K), S(LVec), Param::ZVec, Y(Q), Y(X)]),
    entry(IdentityId::PB1_11, "(1.11)", 1, "multi-parameter nested sum, (x;q)_i form", Backend::Exact, &[S(N), S(K), S(LVec), Param::ZVec, Y(Q), Y(X)]),
    entry(IdentityId::C3_3, "(3.3)", 3, "single-level z kernel, 1 - x^i form", Backend::Exact, &[S(N), S(L), Y(Q), Y(X), Y(Z)]),
    entry(IdentityId::C3_4, "(3.4)", 3, "single-level z kernel, (x;q)_i form", Backend::Exact, &[S(N), S(L), Y(Q), Y(X), Y(Z)]),
    entry(IdentityId::FL3_5, "(3.5)", 3, "w-y sum against 1 - (w;q)_i", Backend::Exact, &[S(N), Y(Q), Y(W), Y(SY)]),
    entry(IdentityId::P3_6, "(3.6)", 3, "four-parameter terminating sum", Backend::Exact, &[S(N), Y(Q), Y(W), Y(X), Y(SY), Y(Z)]),
    entry(IdentityId::A3_7, "(3.7)", 3, "three-parameter sum with a (yq;q) factor", Backend::Exact, &[S(N), Y(Q), Y(W), Y(X), Y(SY)]),
    entry(IdentityId::A3_8, "(3.8)", 3, "three-parameter sum with a (y;q) factor", Backend::Exact, &[S(N), Y(Q), Y(W), Y(X), Y(SY)]),
    entry(IdentityId::A3_9, "(3.9)", 3, "x = 0 case of the four-parameter sum", Backend::Exact, &[S(N), Y(Q), Y(W), Y(SY), Y(Z)]),
    entry(IdentityId::C3_10, "(3.10)", 3, "coefficient of w^r", Backend::Exact, &[S(N), S(R), Y(Q), Y(SY), Y(Z)]),
    entry(IdentityId::P4_1, "(4.1)", 4, "nested sum with independent z_j", Backend::Exact, &[S(N), S(K), Y(Q), Y(X), Param::ZVec]),
    entry(IdentityId::S4_2, "(4.2)", 4, "z_j = z q^-j specialisation", Backend::Exact, &[S(N), S(K), Y(Q), Y(X), Y(Z)]),
    entry(IdentityId::S4_3, "(4.3)", 4, "t-deformed terminal", Backend::Exact, &[S(N), S(K), Y(Q), Y(X), Y(Z), Y(T)]),
    entry(IdentityId::S4_4, "(4.4)", 4, "x -> 1 limit of the t-deformed terminal", Backend::Exact, &[S(N), S(K), Y(Q), Y(Z), Y(T)]),
    entry(IdentityId::S4_5, "(4.5)", 4, "inner chain sum with a (t;q) ratio", Backend::Exact, &[S(I), S(K), Y(Q), Y(Z), Y(T)]),
    entry(IdentityId::E4_7, "(4.7)", 4, "double Gaussian-binomial evaluation", Backend::Exact, &[S(N), S(R), Y(Q), Y(Z)]),
    entry(IdentityId::PC1_12, "(1.12)", 1, "z-t nested sum with a harmonic-type terminal", Backend::Exact, &[S(N), S(K), Y(Q), Y(Z), Y(T)]),
    entry(IdentityId::C4_8, "(4.8)", 4, "n -> infinity limit of the z-t nested sum", Backend::Numeric, &[S(K), Y(Q), Y(Z), Y(T)]),
    entry(IdentityId::HEINE, "HEINE", 3, "q-binomial series as an infinite-product ratio", Backend::Numeric, &[Y(SA), Y(Q), Y(T)]),
    entry(IdentityId::PFRAC, "PFRAC", 3, "partial-fraction series for (q;q)/(y;q)", Backend::Numeric, &[Y(Q), Y(SY)]),
    entry(IdentityId::FINE, "FINE", 3, "terminating-base specialisation of a Fine series", Backend::Numeric, &[S(N), S(I), Y(SY), Y(Q)]),
];

pub fn registry() -> &'static [RegistryEntry] {
    TABLE
}

pub fn entry_for(id: IdentityId) -> &'static RegistryEntry {
    TABLE.iter().find(|e| e.id == id).expect("every id has an entry")
}

/// Entries whose section tag matches `section` (as text, so unknown filters
/// simply select nothing).
pub fn entries_in_section(section: &str) -> Vec<&'static RegistryEntry> {
    TABLE.iter().filter(|e| e.section.to_string() == section.trim()).collect()
}
