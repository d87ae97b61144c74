//! Type checking by minimal-context synthesis.
//!
//! The declarative rules split contexts nondeterministically (application,
//! let, parallel composition) and let promotion weaken with a strongly
//! affine context. Here every subterm instead synthesizes the *least*
//! context it needs; sums happen bottom-up and all weakening is left to the
//! root, where the declared contexts absorb whatever was synthesized.

mod derivation;
mod subtype;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use derivation::{Derivation, Rule};
pub use subtype::{check_subtype, check_subtype_eff};

use crate::syntax::{Effect, SourceUnit, Span, Type};
use crate::usage::{RegionContext, VarContext};
use crate::wellformed::FormationMode;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    Plain,
    Confluent,
    Effects,
    #[serde(rename = "stratified")]
    StratifiedEffects,
    StratifiedConfluent,
}

impl CheckMode {
    pub const ALL: [CheckMode; 5] = [
        CheckMode::Plain,
        CheckMode::Confluent,
        CheckMode::Effects,
        CheckMode::StratifiedEffects,
        CheckMode::StratifiedConfluent,
    ];

    pub fn effects(self) -> bool {
        matches!(
            self,
            CheckMode::Effects | CheckMode::StratifiedEffects | CheckMode::StratifiedConfluent
        )
    }

    pub fn confluent(self) -> bool {
        matches!(self, CheckMode::Confluent | CheckMode::StratifiedConfluent)
    }

    pub fn formation(self) -> FormationMode {
        match self {
            CheckMode::StratifiedEffects | CheckMode::StratifiedConfluent => {
                FormationMode::Stratified
            }
            _ => FormationMode::Unstratified,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckMode::Plain => "plain",
            CheckMode::Confluent => "confluent",
            CheckMode::Effects => "effects",
            CheckMode::StratifiedEffects => "stratified",
            CheckMode::StratifiedConfluent => "stratified-confluent",
        }
    }
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum TypeErrorKind {
    UsageClash,
    AffineUnderBang,
    FamilyViolation,
    ConfluenceRestriction,
    SubtypeFailure,
    FormationFailure,
    ShapeMismatch,
    StoreKindMismatch,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub span: Option<Span>,
    pub explanation: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(sp) => write!(f, "{}: {}: {}", sp, self.kind, self.explanation),
            None => write!(f, "{}: {}", self.kind, self.explanation),
        }
    }
}

impl TypeError {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind.to_string(),
            "line": self.span.map(|s| s.line),
            "col": self.span.map(|s| s.col),
            "explanation": self.explanation,
        })
    }
}

/// The outcome of checking a unit: the minimal contexts the program needs,
/// its type and effect, and the derivation that justifies them.
#[derive(Clone, Debug)]
pub struct Judgement {
    pub mode: CheckMode,
    pub vars: VarContext,
    pub regions: RegionContext,
    pub ty: Type,
    pub effect: Effect,
    pub derivation: Derivation,
}

/// Checks `u` in `mode`: formation first, then synthesis of the main program.
pub fn check_unit(u: &SourceUnit, mode: CheckMode) -> Result<Judgement, TypeError> {
    synth::Checker::new(u, mode).check()
}

/// Like [`check_unit`], additionally requiring the synthesized `(α', e')`
/// to be a subtype of `expected`.
pub fn check_against(
    u: &SourceUnit,
    mode: CheckMode,
    expected: (&Type, &Effect),
) -> Result<Judgement, TypeError> {
    let j = check_unit(u, mode)?;
    let dom: std::collections::BTreeSet<_> = u.regions.iter().map(|d| d.name.clone()).collect();
    if check_subtype_eff(&dom, (&j.ty, &j.effect), expected) {
        Ok(j)
    } else {
        Err(TypeError {
            kind: TypeErrorKind::SubtypeFailure,
            span: None,
            explanation: format!(
                "program has type {} with effect {}, which is not below {} with effect {}",
                j.ty, j.effect, expected.0, expected.1
            ),
        })
    }
}
