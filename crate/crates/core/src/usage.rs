//! Usages of variables and regions, and their partial sum.
//!
//! Variables carry a usage in {0, 1, ∞}; regions carry a vector
//! `[write, read]` drawn from one of three disjoint families. The sum is
//! partial everywhere: `x ⊎ 0 = 0 ⊎ x = x`, `∞ ⊎ ∞ = ∞`, and nothing else.
//! Undefined sums are ordinary values (`None` / `Err(SumClash)`), never panics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{Name, Region, RegionKind, Type};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Usage {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "inf")]
    Many,
}

impl Usage {
    pub const ALL: [Usage; 3] = [Usage::Zero, Usage::One, Usage::Many];
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Usage::Zero => "0",
            Usage::One => "1",
            Usage::Many => "∞",
        })
    }
}

pub fn usage_sum(a: Usage, b: Usage) -> Option<Usage> {
    match (a, b) {
        (x, Usage::Zero) | (Usage::Zero, x) => Some(x),
        (Usage::Many, Usage::Many) => Some(Usage::Many),
        _ => None,
    }
}

/// The three sets of region usages.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum UsageFamily {
    /// `{[∞,∞]}`
    #[serde(rename = "UU")]
    Unrestricted,
    /// `{[1,∞],[0,∞]}`
    #[serde(rename = "WR")]
    WriteOnce,
    /// `{[0,0],[1,0],[0,1],[1,1]}`
    #[serde(rename = "AF")]
    Affine,
}

impl UsageFamily {
    pub const ALL: [UsageFamily; 3] =
        [UsageFamily::Unrestricted, UsageFamily::WriteOnce, UsageFamily::Affine];

    pub fn members(self) -> &'static [UsageVec] {
        use Usage::*;
        match self {
            UsageFamily::Unrestricted => &[UsageVec { write: Many, read: Many }],
            UsageFamily::WriteOnce => {
                &[UsageVec { write: One, read: Many }, UsageVec { write: Zero, read: Many }]
            }
            UsageFamily::Affine => &[
                UsageVec { write: Zero, read: Zero },
                UsageVec { write: One, read: Zero },
                UsageVec { write: Zero, read: One },
                UsageVec { write: One, read: One },
            ],
        }
    }

    /// The neutral element `U₀` of the family.
    pub fn neutral(self) -> UsageVec {
        use Usage::*;
        match self {
            UsageFamily::Unrestricted => UsageVec { write: Many, read: Many },
            UsageFamily::WriteOnce => UsageVec { write: Zero, read: Many },
            UsageFamily::Affine => UsageVec { write: Zero, read: Zero },
        }
    }

    /// Least member expressing one read.
    pub fn read_demand(self) -> UsageVec {
        use Usage::*;
        match self {
            UsageFamily::Unrestricted => UsageVec { write: Many, read: Many },
            UsageFamily::WriteOnce => UsageVec { write: Zero, read: Many },
            UsageFamily::Affine => UsageVec { write: Zero, read: One },
        }
    }

    /// Least member expressing one write.
    pub fn write_demand(self) -> UsageVec {
        use Usage::*;
        match self {
            UsageFamily::Unrestricted => UsageVec { write: Many, read: Many },
            UsageFamily::WriteOnce => UsageVec { write: One, read: Many },
            UsageFamily::Affine => UsageVec { write: One, read: Zero },
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            UsageFamily::Unrestricted => "UU",
            UsageFamily::WriteOnce => "WR",
            UsageFamily::Affine => "AF",
        }
    }
}

/// A region usage `[write, read]`. Only the seven family members are constructible.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct UsageVec {
    pub write: Usage,
    pub read: Usage,
}

impl UsageVec {
    pub fn new(write: Usage, read: Usage) -> Option<UsageVec> {
        let v = UsageVec { write, read };
        v.family().map(|_| v)
    }

    /// All seven vectors, grouped by family.
    pub fn all() -> impl Iterator<Item = UsageVec> {
        UsageFamily::ALL.into_iter().flat_map(|f| f.members().iter().copied())
    }

    /// The family this vector belongs to; the families are disjoint.
    pub fn family(self) -> Option<UsageFamily> {
        UsageFamily::ALL.into_iter().find(|f| f.members().contains(&self))
    }
}

impl fmt::Display for UsageVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.write, self.read)
    }
}

pub fn usagevec_sum(a: UsageVec, b: UsageVec) -> Option<UsageVec> {
    if a.family()? != b.family()? {
        return None;
    }
    let write = usage_sum(a.write, b.write)?;
    let read = usage_sum(a.read, b.read)?;
    UsageVec::new(write, read)
}

/// Why a context sum is undefined.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum SumClash {
    #[error("variable `{0}` is used {1} ⊎ {2}, which is undefined")]
    VarUsage(Name, Usage, Usage),
    #[error("variable `{0}` has two different types: {1} and {2}")]
    VarType(Name, Type, Type),
    #[error("region `{0}`: {1} ⊎ {2} is undefined")]
    RegionUsage(Region, UsageVec, UsageVec),
    #[error("region `{0}` is declared with different kinds or content types")]
    RegionShape(Region),
}

/// Γ: variable → (usage, type).
#[derive(Clone, Default, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarContext(BTreeMap<Name, (Usage, Type)>);

impl VarContext {
    pub fn new() -> Self {
        VarContext(BTreeMap::new())
    }

    pub fn singleton(x: Name, u: Usage, ty: Type) -> Self {
        VarContext(BTreeMap::from([(x, (u, ty))]))
    }

    pub fn get(&self, x: &Name) -> Option<&(Usage, Type)> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: Name, u: Usage, ty: Type) {
        self.0.insert(x, (u, ty));
    }

    pub fn remove(&mut self, x: &Name) -> Option<(Usage, Type)> {
        self.0.remove(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &(Usage, Type))> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Name, Usage, Type)> for VarContext {
    fn from_iter<I: IntoIterator<Item = (Name, Usage, Type)>>(iter: I) -> Self {
        VarContext(iter.into_iter().map(|(x, u, t)| (x, (u, t))).collect())
    }
}

pub fn ctx_sum(a: &VarContext, b: &VarContext) -> Result<VarContext, SumClash> {
    let mut out = a.clone();
    for (x, (u2, t2)) in b.iter() {
        match out.0.get_mut(x) {
            None => {
                out.0.insert(x.clone(), (*u2, t2.clone()));
            }
            Some((u1, t1)) => {
                if t1 != t2 {
                    return Err(SumClash::VarType(x.clone(), t1.clone(), t2.clone()));
                }
                *u1 = usage_sum(*u1, *u2).ok_or(SumClash::VarUsage(x.clone(), *u1, *u2))?;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RegionEntry {
    pub usage: UsageVec,
    pub kind: RegionKind,
    pub content: Type,
}

/// R: region → (usage vector, kind, content type).
#[derive(Clone, Default, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionContext(BTreeMap<Region, RegionEntry>);

impl RegionContext {
    pub fn new() -> Self {
        RegionContext(BTreeMap::new())
    }

    pub fn get(&self, r: &Region) -> Option<&RegionEntry> {
        self.0.get(r)
    }

    pub fn insert(&mut self, r: Region, entry: RegionEntry) {
        self.0.insert(r, entry);
    }

    pub fn contains(&self, r: &Region) -> bool {
        self.0.contains_key(r)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Region, &RegionEntry)> {
        self.0.iter()
    }

    pub fn regions(&self) -> impl Iterator<Item = &Region> {
        self.0.keys()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sums two region contexts, padding a region missing on one side with its
/// family's neutral usage first.
pub fn regionctx_sum(a: &RegionContext, b: &RegionContext) -> Result<RegionContext, SumClash> {
    let mut out = a.clone();
    for (r, e2) in b.iter() {
        match out.0.get_mut(r) {
            None => {
                out.0.insert(r.clone(), e2.clone());
            }
            Some(e1) => {
                if e1.kind != e2.kind || e1.content != e2.content {
                    return Err(SumClash::RegionShape(r.clone()));
                }
                e1.usage = usagevec_sum(e1.usage, e2.usage)
                    .ok_or(SumClash::RegionUsage(r.clone(), e1.usage, e2.usage))?;
            }
        }
    }
    Ok(out)
}

/// A single hypothesis of a judgement.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Hyp {
    Var(Usage),
    Region(UsageVec, RegionKind),
}

pub fn is_aff_hyp(h: Hyp) -> bool {
    match h {
        Hyp::Var(u) => u == Usage::One,
        Hyp::Region(v, kind) => {
            v.write == Usage::One
                || v.read == Usage::One
                || (kind == RegionKind::Volatile && v.read != Usage::Zero)
        }
    }
}

/// `(aff(R;Γ), saff(R;Γ))`: some hypothesis is affine / every hypothesis is.
pub fn aff_ctx(r: &RegionContext, g: &VarContext) -> (bool, bool) {
    let hyps = r
        .iter()
        .map(|(_, e)| Hyp::Region(e.usage, e.kind))
        .chain(g.iter().map(|(_, (u, _))| Hyp::Var(*u)));
    let mut any = false;
    let mut all = true;
    for h in hyps {
        let a = is_aff_hyp(h);
        any |= a;
        all &= a;
    }
    (any, all)
}
