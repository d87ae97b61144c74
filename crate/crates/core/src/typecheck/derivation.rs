use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::syntax::{print_term, Effect, Name, Term, Type};
use crate::usage::{RegionContext, VarContext};

/// Typing rules, one per syntactic form (plus the three ways of typing `|`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Rule {
    Var,
    Unit,
    Lam,
    App,
    Promote,
    LetBang,
    Nu,
    Get,
    Set,
    Pset,
    StoreVolatile,
    StorePersistent,
    /// `(P | S)` with `S` a store.
    ParStore,
    /// `(S | P)` with `S` a store.
    StorePar,
    /// `(P1 | P2)` with neither side a store.
    Par,
}

/// One node per term node, premises in the order of the term's children.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub rule: Rule,
    pub vars: VarContext,
    pub regions: RegionContext,
    pub ty: Type,
    pub effect: Effect,
    /// The variable a binder introduces and the type it is introduced at.
    pub binder: Option<(Name, Type)>,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// JSON rendering, walking `term` in lockstep to label every node.
    pub fn to_json(&self, term: &Term) -> Value {
        let premises: Vec<Value> = self
            .premises
            .iter()
            .zip(term.children())
            .map(|(d, t)| d.to_json(t))
            .collect();
        let vars: Vec<Value> = self
            .vars
            .iter()
            .map(|(x, (u, a))| json!({"name": x.as_str(), "usage": u, "type": a.to_string()}))
            .collect();
        let regions: Vec<Value> = self
            .regions
            .iter()
            .map(|(r, e)| {
                json!({
                    "name": r.as_str(),
                    "usage": e.usage.to_string(),
                    "kind": e.kind,
                    "content": e.content.to_string(),
                })
            })
            .collect();
        let mut node = json!({
            "rule": self.rule,
            "term": print_term(term),
            "type": self.ty.to_string(),
            "effect": self.effect.iter().map(|r| r.as_str()).collect::<Vec<_>>(),
            "vars": vars,
            "regions": regions,
            "premises": premises,
        });
        if let Some((x, a)) = &self.binder {
            node["binder"] = json!({"name": x.as_str(), "type": a.to_string()});
        }
        node
    }
}
