use std::fmt;

use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational};
use crate::params::{ParamEnv, Symbol};

use super::{entry_for, IdentityId, Param};

/// Integer shape slots of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKey {
    N,
    K,
    R,
    I,
    M,
    L,
    MVec,
    LVec,
    /// Number of series terms for tail-bounded identities (optional).
    Trunc,
}

impl ShapeKey {
    pub const ALL: [ShapeKey; 9] = [
        ShapeKey::N,
        ShapeKey::K,
        ShapeKey::R,
        ShapeKey::I,
        ShapeKey::M,
        ShapeKey::L,
        ShapeKey::MVec,
        ShapeKey::LVec,
        ShapeKey::Trunc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKey::N => "n",
            ShapeKey::K => "k",
            ShapeKey::R => "r",
            ShapeKey::I => "i",
            ShapeKey::M => "m",
            ShapeKey::L => "l",
            ShapeKey::MVec => "mv",
            ShapeKey::LVec => "lv",
            ShapeKey::Trunc => "R",
        }
    }
}

/// Largest accepted shape integer; keeps exact evaluation at desk scale.
pub const MAX_SHAPE: u32 = 64;

/// An identity together with everything needed to evaluate it once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityInstance {
    pub id: IdentityId,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub r: Option<u32>,
    pub i: Option<u32>,
    pub m: Option<u32>,
    pub l: Option<u32>,
    pub m_vec: Option<Vec<u32>>,
    pub l_vec: Option<Vec<u32>>,
    pub env: ParamEnv,
    pub trunc: Option<u32>,
}

impl IdentityInstance {
    pub fn new(id: IdentityId) -> Self {
        IdentityInstance {
            id,
            n: None,
            k: None,
            r: None,
            i: None,
            m: None,
            l: None,
            m_vec: None,
            l_vec: None,
            env: ParamEnv::new(),
            trunc: None,
        }
    }

    fn slot(&mut self, key: ShapeKey) -> &mut Option<u32> {
        match key {
            ShapeKey::N => &mut self.n,
            ShapeKey::K => &mut self.k,
            ShapeKey::R => &mut self.r,
            ShapeKey::I => &mut self.i,
            ShapeKey::M => &mut self.m,
            ShapeKey::L => &mut self.l,
            ShapeKey::Trunc => &mut self.trunc,
            ShapeKey::MVec | ShapeKey::LVec => panic!("vector slot {key:?} has no scalar value"),
        }
    }

    pub fn shape(&self, key: ShapeKey) -> Option<u32> {
        match key {
            ShapeKey::N => self.n,
            ShapeKey::K => self.k,
            ShapeKey::R => self.r,
            ShapeKey::I => self.i,
            ShapeKey::M => self.m,
            ShapeKey::L => self.l,
            ShapeKey::Trunc => self.trunc,
            ShapeKey::MVec | ShapeKey::LVec => None,
        }
    }

    fn has(&self, key: ShapeKey) -> bool {
        match key {
            ShapeKey::MVec => self.m_vec.is_some(),
            ShapeKey::LVec => self.l_vec.is_some(),
            other => self.shape(other).is_some(),
        }
    }

    pub fn with(mut self, key: ShapeKey, value: u32) -> Self {
        *self.slot(key) = Some(value);
        self
    }

    pub fn with_m_vec(mut self, v: Vec<u32>) -> Self {
        self.m_vec = Some(v);
        self
    }

    pub fn with_l_vec(mut self, v: Vec<u32>) -> Self {
        self.l_vec = Some(v);
        self
    }

    pub fn with_sym(mut self, sym: Symbol, value: crate::field::ExactScalar) -> Self {
        self.env.set(sym, value);
        self
    }

    pub fn with_z_vec(mut self, v: Vec<crate::field::ExactScalar>) -> Self {
        self.env.z_vec = Some(v);
        self
    }

    /// A required shape integer, as a signed index.
    pub fn need(&self, key: ShapeKey) -> Result<i64> {
        self.shape(key)
            .map(i64::from)
            .ok_or_else(|| Error::schema(format!("{} requires `{}`", self.id, key.name())))
    }

    pub fn m_vec(&self) -> Result<&[u32]> {
        self.m_vec.as_deref().ok_or_else(|| Error::schema(format!("{} requires `mv`", self.id)))
    }

    pub fn l_vec(&self) -> Result<&[u32]> {
        self.l_vec.as_deref().ok_or_else(|| Error::schema(format!("{} requires `lv`", self.id)))
    }

    /// Check that exactly the schema's slots are present and in range.
    pub fn validate(&self) -> Result<()> {
        let entry = entry_for(self.id);
        let id = self.id;
        for p in entry.params {
            let present = match *p {
                Param::Shape(ShapeKey::Trunc) => true,
                Param::Shape(key) => self.has(key),
                Param::Sym(sym) => self.env.get(sym).is_some(),
                Param::ZVec => self.env.z_vec.is_some(),
            };
            if !present {
                return Err(Error::schema(format!("{id} requires `{}`", p.name())));
            }
        }
        for key in ShapeKey::ALL {
            if self.has(key) && !entry.requires(Param::Shape(key)) {
                return Err(Error::schema(format!("{id} does not take `{}`", key.name())));
            }
        }
        for sym in self.env.symbols() {
            if !entry.requires(Param::Sym(sym)) {
                return Err(Error::schema(format!("{id} does not take `{sym}`")));
            }
        }
        if self.env.z_vec.is_some() && !entry.requires(Param::ZVec) {
            return Err(Error::schema(format!("{id} does not take `zv`")));
        }
        for key in ShapeKey::ALL {
            if let Some(v) = self.shape(key) {
                if v > MAX_SHAPE && key != ShapeKey::Trunc {
                    return Err(Error::schema(format!("`{}` = {v} exceeds the supported maximum {MAX_SHAPE}", key.name())));
                }
            }
        }
        for v in [&self.m_vec, &self.l_vec].into_iter().flatten() {
            if v.len() > MAX_SHAPE as usize || v.iter().any(|&e| e > MAX_SHAPE) {
                return Err(Error::schema("vector entry or length exceeds the supported maximum"));
            }
        }
        self.validate_ranges()
    }

    fn validate_ranges(&self) -> Result<()> {
        use IdentityId::*;
        let id = self.id;
        let at_least = |key: ShapeKey, min: u32| -> Result<()> {
            match self.shape(key) {
                Some(v) if v < min => Err(Error::schema(format!("{id}: `{}` must be at least {min}", key.name()))),
                _ => Ok(()),
            }
        };
        let not_above = |lo: ShapeKey, hi: ShapeKey| -> Result<()> {
            match (self.shape(lo), self.shape(hi)) {
                (Some(a), Some(b)) if a > b => {
                    Err(Error::schema(format!("{id}: `{}` must not exceed `{}`", lo.name(), hi.name())))
                }
                _ => Ok(()),
            }
        };
        let vec_len = |name: &str, len: usize, want: Option<u32>| -> Result<()> {
            match want {
                Some(w) if w as usize != len => {
                    Err(Error::schema(format!("{id}: `{name}` has length {len}, expected {w}")))
                }
                _ => Ok(()),
            }
        };
        at_least(ShapeKey::M, 1)?;
        at_least(ShapeKey::L, 1)?;
        match id {
            L3_1 | L3_2 => {
                at_least(ShapeKey::I, 1)?;
                not_above(ShapeKey::I, ShapeKey::N)?;
            }
            NB3 => at_least(ShapeKey::I, 1)?,
            FINE => not_above(ShapeKey::I, ShapeKey::N)?,
            C3_10 | E4_7 => {
                at_least(ShapeKey::R, 1)?;
                not_above(ShapeKey::R, ShapeKey::N)?;
            }
            C2_14 | C2_15 => {
                at_least(ShapeKey::R, 1)?;
                vec_len("mv", self.m_vec()?.len(), self.r)?;
            }
            TA1_8 | TA1_9 => {
                at_least(ShapeKey::K, 1)?;
                vec_len("mv", self.m_vec()?.len(), self.k)?;
            }
            PB1_10 | PB1_11 => {
                at_least(ShapeKey::K, 1)?;
                let lv = self.l_vec()?;
                vec_len("lv", lv.len(), self.k)?;
                if lv.iter().any(|&l| l < 1) {
                    return Err(Error::schema(format!("{id}: entries of `lv` must be at least 1")));
                }
                vec_len("zv", self.env.z_vec.as_ref().map_or(0, Vec::len), self.k)?;
            }
            P4_1 => {
                at_least(ShapeKey::K, 1)?;
                vec_len("zv", self.env.z_vec.as_ref().map_or(0, Vec::len), self.k)?;
            }
            _ => at_least(ShapeKey::K, 1)?,
        }
        if let Some(t) = self.trunc {
            if t == 0 {
                return Err(Error::schema(format!("{id}: truncation `R` must be positive")));
            }
        }
        Ok(())
    }

    /// Parse `n=2,m=1,q=1/2,mv=1:2,zv=1/3:2/5` into an instance. The result
    /// is not yet validated against the schema.
    pub fn parse_assignments(id: IdentityId, text: &str) -> Result<Self> {
        let mut inst = IdentityInstance::new(id);
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) =
                part.split_once('=').ok_or_else(|| Error::schema(format!("expected key=value, got `{part}`")))?;
            inst.assign(key.trim(), value.trim())?;
        }
        Ok(inst)
    }

    pub fn assign(&mut self, key: &str, value: &str) -> Result<()> {
        let int = |v: &str| -> Result<u32> {
            v.parse::<u32>().map_err(|_| Error::schema(format!("`{key}` expects a non-negative integer, got `{v}`")))
        };
        let ints = |v: &str| -> Result<Vec<u32>> {
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split(':').map(|e| int(e.trim())).collect()
        };
        if let Some(shape) = ShapeKey::ALL.into_iter().find(|k| k.name() == key) {
            match shape {
                ShapeKey::MVec => self.m_vec = Some(ints(value)?),
                ShapeKey::LVec => self.l_vec = Some(ints(value)?),
                other => *self.slot(other) = Some(int(value)?),
            }
            return Ok(());
        }
        if key == "zv" {
            let zs = if value.is_empty() {
                Vec::new()
            } else {
                value.split(':').map(parse_rational).collect::<Result<Vec<_>>>()?
            };
            self.env.z_vec = Some(zs);
            return Ok(());
        }
        let sym: Symbol = key.parse()?;
        self.env.set(sym, parse_rational(value)?);
        Ok(())
    }

    /// `key=value` pairs in a fixed order, suitable for round-tripping
    /// through [`IdentityInstance::parse_assignments`].
    pub fn assignments(&self) -> Vec<(String, String)> {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(":");
        let mut out = Vec::new();
        for key in ShapeKey::ALL {
            match key {
                ShapeKey::MVec => {
                    if let Some(v) = &self.m_vec {
                        out.push(("mv".to_string(), join(v)));
                    }
                }
                ShapeKey::LVec => {
                    if let Some(v) = &self.l_vec {
                        out.push(("lv".to_string(), join(v)));
                    }
                }
                other => {
                    if let Some(v) = self.shape(other) {
                        out.push((other.name().to_string(), v.to_string()));
                    }
                }
            }
        }
        for (sym, v) in self.env.iter() {
            out.push((sym.name().to_string(), format_rational(v)));
        }
        if let Some(zs) = &self.env.z_vec {
            out.push(("zv".to_string(), zs.iter().map(format_rational).collect::<Vec<_>>().join(":")));
        }
        out
    }
}

impl fmt::Display for IdentityInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.assignments().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{} [{}]", self.id, parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    #[test]
    fn parses_and_validates() {
        let inst = IdentityInstance::parse_assignments(IdentityId::D1_1, "n=2,m=1,q=1/2").unwrap();
        inst.validate().unwrap();
        assert_eq!(inst.n, Some(2));
        assert_eq!(inst.env.get(Symbol::Q), Some(&rat(1, 2)));
    }

    #[test]
    fn missing_and_extra_parameters_are_schema_errors() {
        let missing = IdentityInstance::parse_assignments(IdentityId::D1_1, "n=2,m=1").unwrap();
        assert!(matches!(missing.validate(), Err(Error::Schema(_))));
        let extra = IdentityInstance::parse_assignments(IdentityId::D1_1, "n=2,m=1,q=1/2,x=3").unwrap();
        assert!(matches!(extra.validate(), Err(Error::Schema(_))));
    }

    #[test]
    fn vector_lengths_must_match() {
        let bad = IdentityInstance::parse_assignments(IdentityId::TA1_8, "n=3,k=2,mv=1,q=1/2,x=1/3").unwrap();
        assert!(matches!(bad.validate(), Err(Error::Schema(_))));
        let good = IdentityInstance::parse_assignments(IdentityId::TA1_8, "n=3,k=2,mv=1:0,q=1/2,x=1/3").unwrap();
        good.validate().unwrap();
    }

    #[test]
    fn assignments_round_trip() {
        let text = "n=3,k=2,lv=1:2,q=2/5,x=1/3,zv=3/7:7/2";
        let inst = IdentityInstance::parse_assignments(IdentityId::PB1_10, text).unwrap();
        inst.validate().unwrap();
        let rendered: Vec<String> = inst.assignments().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        let again = IdentityInstance::parse_assignments(IdentityId::PB1_10, &rendered.join(",")).unwrap();
        assert_eq!(inst, again);
    }
}
