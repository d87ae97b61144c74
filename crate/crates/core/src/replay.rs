//! Independent re-check of derivation trees.
//!
//! Nothing here calls into the checker: the context sums, the affinity
//! predicate and subtyping are re-implemented from the rule tables so that a
//! bug in synthesis cannot hide behind the same bug in its checker.

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::{Effect, Name, Region, RegionKind, SourceUnit, StoreKind, Term, Type};
use crate::typecheck::{CheckMode, Derivation, Rule};
use crate::usage::{RegionContext, RegionEntry, Usage, UsageFamily, UsageVec, VarContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayError {
    /// Child indices from the root to the offending node.
    pub path: Vec<usize>,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {:?} ({:?}): {}", self.path, self.rule, self.message)
    }
}

impl std::error::Error for ReplayError {}

/// Validates `d` as a derivation of `u.main` in `mode`.
pub fn replay(u: &SourceUnit, mode: CheckMode, d: &Derivation) -> Result<(), ReplayError> {
    let mut r = Replayer { unit: u, mode, scope: Vec::new(), path: Vec::new() };
    r.root(d)?;
    r.node(&u.main, d)
}

struct Replayer<'a> {
    unit: &'a SourceUnit,
    mode: CheckMode,
    scope: Vec<(Name, Usage, Type)>,
    path: Vec<usize>,
}

// ---- the algebra, again ---------------------------------------------------

fn plus(a: Usage, b: Usage) -> Option<Usage> {
    use Usage::*;
    match (a, b) {
        (Zero, x) | (x, Zero) => Some(x),
        (Many, Many) => Some(Many),
        _ => None,
    }
}

fn member(f: UsageFamily, v: UsageVec) -> bool {
    use Usage::*;
    let (w, r) = (v.write, v.read);
    match f {
        UsageFamily::Unrestricted => w == Many && r == Many,
        UsageFamily::WriteOnce => r == Many && w != Many,
        UsageFamily::Affine => w != Many && r != Many,
    }
}

fn neutral(f: UsageFamily) -> UsageVec {
    use Usage::*;
    let (w, r) = match f {
        UsageFamily::Unrestricted => (Many, Many),
        UsageFamily::WriteOnce => (Zero, Many),
        UsageFamily::Affine => (Zero, Zero),
    };
    UsageVec { write: w, read: r }
}

fn vplus(f: UsageFamily, a: UsageVec, b: UsageVec) -> Option<UsageVec> {
    let s = UsageVec { write: plus(a.write, b.write)?, read: plus(a.read, b.read)? };
    (member(f, a) && member(f, b) && member(f, s)).then_some(s)
}

fn affine(v: UsageVec, kind: RegionKind) -> bool {
    v.write == Usage::One
        || v.read == Usage::One
        || (kind == RegionKind::Volatile && v.read != Usage::Zero)
}

fn below(dom: &BTreeSet<Region>, a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::One, Type::One) | (Type::Behaviour, Type::Behaviour) => true,
        (Type::Reg(r, a), Type::Reg(s, b)) => r == s && a == b,
        (Type::Bang(a), Type::Bang(b)) => below(dom, a, b),
        (Type::Arrow(a, e, x), Type::Arrow(b, f, y)) => {
            e.is_subset(f) && f.iter().all(|r| dom.contains(r)) && below(dom, b, a) && below(dom, x, y)
        }
        _ => false,
    }
}

fn type_regions(t: &Type) -> BTreeSet<Region> {
    let mut s = BTreeSet::new();
    t.regions(&mut s);
    s
}

impl<'a> Replayer<'a> {
    fn fail<T>(&self, rule: Rule, message: impl Into<String>) -> Result<T, ReplayError> {
        Err(ReplayError { path: self.path.clone(), rule, message: message.into() })
    }

    fn family(&self, r: &Region) -> Option<UsageFamily> {
        self.unit.regions.iter().find(|d| &d.name == r).map(|d| d.family)
    }

    fn entry_ok(&self, r: &Region, e: &RegionEntry) -> bool {
        self.unit.regions.iter().any(|d| {
            &d.name == r && d.kind == e.kind && d.content == e.content && member(d.family, e.usage)
        })
    }

    /// `Γ1 ⊎ Γ2`, or None.
    fn gsum(a: &VarContext, b: &VarContext) -> Option<Vec<(Name, Usage, Type)>> {
        let mut out: Vec<(Name, Usage, Type)> =
            a.iter().map(|(x, (u, t))| (x.clone(), *u, t.clone())).collect();
        for (x, (u, t)) in b.iter() {
            match out.iter_mut().find(|(y, _, _)| y == x) {
                None => out.push((x.clone(), *u, t.clone())),
                Some((_, v, s)) => {
                    if s != t {
                        return None;
                    }
                    *v = plus(*v, *u)?;
                }
            }
        }
        Some(out)
    }

    fn same_vars(got: &VarContext, want: Option<Vec<(Name, Usage, Type)>>) -> bool {
        match want {
            None => false,
            Some(w) => {
                w.len() == got.len()
                    && w.iter().all(|(x, u, t)| got.get(x).is_some_and(|(v, s)| v == u && s == t))
            }
        }
    }

    /// `R1 ⊎ R2`, padding regions missing on one side with the neutral vector.
    fn rsum(&self, a: &RegionContext, b: &RegionContext) -> Option<RegionContext> {
        let mut out = RegionContext::new();
        let names: BTreeSet<&Region> = a.regions().chain(b.regions()).collect();
        for r in names {
            let f = self.family(r)?;
            let e = match (a.get(r), b.get(r)) {
                (Some(x), Some(y)) => {
                    if x.kind != y.kind || x.content != y.content {
                        return None;
                    }
                    RegionEntry { usage: vplus(f, x.usage, y.usage)?, ..x.clone() }
                }
                (Some(x), None) | (None, Some(x)) => x.clone(),
                (None, None) => unreachable!(),
            };
            out.insert(r.clone(), e);
        }
        Some(out)
    }

    /// `got` is `base` plus (possibly) extra regions at their neutral usage.
    fn extends(&self, got: &RegionContext, base: &RegionContext) -> bool {
        base.iter().all(|(r, e)| got.get(r) == Some(e))
            && got.iter().all(|(r, e)| {
                base.contains(r) || self.family(r).is_some_and(|f| e.usage == neutral(f))
            })
    }

    fn effects_allowed(&self, e: &Effect) -> bool {
        self.mode.effects() || e.is_empty()
    }

    fn lookup(&self, x: &Name) -> Option<(Usage, Type)> {
        if let Some((_, u, t)) = self.scope.iter().rev().find(|(y, _, _)| y == x) {
            return Some((*u, t.clone()));
        }
        self.unit.free.iter().find(|d| &d.name == x).map(|d| (d.usage, d.ty.clone()))
    }

    fn root(&self, d: &Derivation) -> Result<(), ReplayError> {
        for (x, (u, t)) in d.vars.iter() {
            let ok = self.unit.free.iter().any(|f| &f.name == x && f.usage == *u && &f.ty == t);
            if !ok {
                return self.fail(d.rule, format!("{x} is not declared as ({u}, {t})"));
            }
        }
        if self.mode.confluent() && self.unit.regions.iter().any(|r| r.family == UsageFamily::Unrestricted) {
            return self.fail(d.rule, "the unrestricted family is excluded under confluence");
        }
        Ok(())
    }

    fn with<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> Result<T, ReplayError>) -> Result<T, ReplayError> {
        self.path.push(i);
        let out = f(self);
        self.path.pop();
        out
    }

    fn node(&mut self, t: &Term, d: &Derivation) -> Result<(), ReplayError> {
        let rule = d.rule;
        // every node: well-formed R, Γ's types inside dom(R), allowed effects
        for (r, e) in d.regions.iter() {
            if !self.entry_ok(r, e) {
                return self.fail(rule, format!("region {r} has an entry outside its declaration"));
            }
        }
        let dom: BTreeSet<Region> = d.regions.regions().cloned().collect();
        for (x, (_, a)) in d.vars.iter() {
            if !type_regions(a).is_subset(&dom) {
                return self.fail(rule, format!("the type of {x} mentions regions outside R"));
            }
            if !self.mode.effects() && !a.is_effect_free() {
                return self.fail(rule, format!("{x} carries a latent effect"));
            }
        }
        if !self.effects_allowed(&d.effect) || (!self.mode.effects() && !d.ty.is_effect_free()) {
            return self.fail(rule, "effects are not part of this mode");
        }
        if !d.effect.iter().all(|r| dom.contains(r)) {
            return self.fail(rule, "effect mentions a region outside R");
        }
        if d.premises.len() != t.children().len() {
            return self.fail(rule, "wrong number of premises");
        }
        let none = Effect::empty();
        match (t, rule) {
            (Term::Unit, Rule::Unit) => {
                if d.ty != Type::One || !d.vars.is_empty() || d.effect != none {
                    return self.fail(rule, "* : (1, ∅) in any R with empty Γ");
                }
            }
            (Term::Var(x), Rule::Var) => {
                let Some((u, a)) = self.lookup(&x.name) else {
                    return self.fail(rule, format!("{} is unbound", x.name));
                };
                let want: VarContext = [(x.name.clone(), u, a.clone())].into_iter().collect();
                if d.vars != want || d.ty != a || d.effect != none {
                    return self.fail(rule, format!("axiom must read {}:({u}, {a}) ⊢ {} : ({a}, ∅)", x.name, x.name));
                }
            }
            (Term::Lam(x, a, body), Rule::Lam) => {
                let p = &d.premises[0];
                self.scope.push((x.clone(), Usage::One, a.clone()));
                let r = self.with(0, |s| s.node(body, p));
                self.scope.pop();
                r?;
                if d.binder.as_ref() != Some(&(x.clone(), a.clone())) {
                    return self.fail(rule, "binder does not match the annotation");
                }
                match p.vars.get(x) {
                    None => {}
                    Some((Usage::One, b)) if b == a => {}
                    Some(_) => return self.fail(rule, format!("{x} must be assumed at (1, {a})")),
                }
                let mut rest: Vec<(Name, Usage, Type)> =
                    p.vars.iter().map(|(y, (u, t))| (y.clone(), *u, t.clone())).collect();
                rest.retain(|(y, _, _)| y != x);
                if !Self::same_vars(&d.vars, Some(rest)) {
                    return self.fail(rule, "conclusion Γ must be the premise's minus x");
                }
                if !self.extends(&d.regions, &p.regions) || !type_regions(a).is_subset(&dom) {
                    return self.fail(rule, "region context changed across λ");
                }
                let want = Type::Arrow(Box::new(a.clone()), p.effect.clone(), Box::new(p.ty.clone()));
                if d.ty != want || d.effect != none {
                    return self.fail(rule, format!("expected ({want}, ∅)"));
                }
            }
            (Term::App(f, a), Rule::App) => {
                let (pf, pa) = (&d.premises[0], &d.premises[1]);
                self.with(0, |s| s.node(f, pf))?;
                self.with(1, |s| s.node(a, pa))?;
                let Type::Arrow(dom_ty, latent, cod) = &pf.ty else {
                    return self.fail(rule, "function premise is not an arrow");
                };
                if !Self::same_vars(&d.vars, Self::gsum(&pf.vars, &pa.vars)) {
                    return self.fail(rule, "Γ is not the sum of the premises");
                }
                if self.rsum(&pf.regions, &pa.regions).as_ref() != Some(&d.regions) {
                    return self.fail(rule, "R is not the sum of the premises");
                }
                if !below(&dom, &pa.ty, dom_ty) {
                    return self.fail(rule, format!("argument type {} is not below {dom_ty}", pa.ty));
                }
                let e = pf.effect.union(&pa.effect).union(latent);
                if &d.ty != cod.as_ref() || d.effect != e {
                    return self.fail(rule, format!("expected ({cod}, {e})"));
                }
            }
            (Term::Bang(m), Rule::Promote) => {
                let p = &d.premises[0];
                self.with(0, |s| s.node(m, p))?;
                let aff = p.vars.iter().any(|(_, (u, _))| *u == Usage::One)
                    || p.regions.iter().any(|(_, e)| affine(e.usage, e.kind));
                if aff {
                    return self.fail(rule, "promotion over an affine hypothesis");
                }
                if p.ty == Type::Behaviour {
                    return self.fail(rule, "B cannot be promoted");
                }
                if d.vars != p.vars || d.regions != p.regions {
                    return self.fail(rule, "promotion must keep the context");
                }
                if d.ty != Type::Bang(Box::new(p.ty.clone())) || d.effect != p.effect {
                    return self.fail(rule, "expected !A with the same effect");
                }
            }
            (Term::LetBang(x, m, n), Rule::LetBang) => {
                let (pm, pn) = (&d.premises[0], &d.premises[1]);
                self.with(0, |s| s.node(m, pm))?;
                let Type::Bang(a) = &pm.ty else {
                    return self.fail(rule, "bound term is not of type !A");
                };
                let a = (**a).clone();
                if d.binder.as_ref() != Some(&(x.clone(), a.clone())) {
                    return self.fail(rule, "binder does not match the bound type");
                }
                self.scope.push((x.clone(), Usage::Many, a.clone()));
                let r = self.with(1, |s| s.node(n, pn));
                self.scope.pop();
                r?;
                match pn.vars.get(x) {
                    None => {}
                    Some((Usage::Many, b)) if *b == a => {}
                    Some(_) => return self.fail(rule, format!("{x} must be assumed at (∞, {a})")),
                }
                let body: VarContext = pn
                    .vars
                    .iter()
                    .filter(|(y, _)| *y != x)
                    .map(|(y, (u, t))| (y.clone(), *u, t.clone()))
                    .collect();
                if !Self::same_vars(&d.vars, Self::gsum(&pm.vars, &body)) {
                    return self.fail(rule, "Γ is not the sum of the premises");
                }
                match self.rsum(&pm.regions, &pn.regions) {
                    Some(s) if self.extends(&d.regions, &s) => {}
                    _ => return self.fail(rule, "R is not the sum of the premises"),
                }
                if d.ty != pn.ty || d.effect != pm.effect.union(&pn.effect) {
                    return self.fail(rule, "let ! must keep the body type and join the effects");
                }
            }
            (Term::Nu(x, r, a, body), Rule::Nu) => {
                let p = &d.premises[0];
                let rt = Type::Reg(r.clone(), Box::new(a.clone()));
                if !self.unit.regions.iter().any(|dcl| &dcl.name == r && &dcl.content == a) {
                    return self.fail(rule, format!("{r} is not declared with content {a}"));
                }
                if d.binder.as_ref() != Some(&(x.clone(), rt.clone())) {
                    return self.fail(rule, "binder does not match the annotation");
                }
                self.scope.push((x.clone(), Usage::Many, rt.clone()));
                let res = self.with(0, |s| s.node(body, p));
                self.scope.pop();
                res?;
                if p.vars.get(x).is_some_and(|(_, t)| *t != rt) {
                    return self.fail(rule, format!("{x} must have type {rt}"));
                }
                let rest: Vec<_> = p
                    .vars
                    .iter()
                    .filter(|(y, _)| *y != x)
                    .map(|(y, (u, t))| (y.clone(), *u, t.clone()))
                    .collect();
                if !Self::same_vars(&d.vars, Some(rest)) || !self.extends(&d.regions, &p.regions) {
                    return self.fail(rule, "ν must only discharge x");
                }
                if !dom.contains(r) {
                    return self.fail(rule, format!("{r} must be in R"));
                }
                if d.ty != p.ty || d.effect != p.effect {
                    return self.fail(rule, "ν keeps the type and effect");
                }
            }
            (Term::Get(x), Rule::Get) => {
                let Some((u, xt)) = self.lookup(&x.name) else {
                    return self.fail(rule, format!("{} is unbound", x.name));
                };
                let Type::Reg(r, a) = xt.clone() else {
                    return self.fail(rule, "get needs an address of region type");
                };
                let want: VarContext = [(x.name.clone(), u, xt.clone())].into_iter().collect();
                if d.vars != want {
                    return self.fail(rule, "Γ must be exactly the address");
                }
                match d.regions.get(&r) {
                    Some(e) if e.usage.read != Usage::Zero => {}
                    _ => return self.fail(rule, format!("{r} needs a read usage")),
                }
                let e = if self.mode.effects() { Effect::single(r.clone()) } else { none };
                if d.ty != *a || d.effect != e {
                    return self.fail(rule, format!("expected ({a}, {e})"));
                }
            }
            (Term::Set(x, v), Rule::Set)
            | (Term::Pset(x, v), Rule::Pset)
            | (Term::Store(x, StoreKind::Volatile, v), Rule::StoreVolatile)
            | (Term::Store(x, StoreKind::Persistent, v), Rule::StorePersistent) => {
                let p = &d.premises[0];
                self.with(0, |s| s.node(v, p))?;
                let Some((u, xt)) = self.lookup(&x.name) else {
                    return self.fail(rule, format!("{} is unbound", x.name));
                };
                let Type::Reg(r, a) = xt.clone() else {
                    return self.fail(rule, "the address must have region type");
                };
                let decl = self.unit.regions.iter().find(|dcl| dcl.name == r).expect("checked by entry_ok");
                let volatile = matches!(rule, Rule::Set | Rule::StoreVolatile);
                if (decl.kind == RegionKind::Volatile) != volatile {
                    return self.fail(rule, format!("{r} has the wrong kind"));
                }
                if !Self::same_vars(&d.vars, Self::gsum(&[(x.name.clone(), u, xt.clone())].into_iter().collect(), &p.vars)) {
                    return self.fail(rule, "Γ must be the address plus the value's context");
                }
                let Some(full) = d.regions.get(&r) else {
                    return self.fail(rule, format!("{r} is missing from R"));
                };
                let rest = p.regions.get(&r).map(|e| e.usage).unwrap_or(neutral(decl.family));
                let write_found = UsageVec::all()
                    .any(|w| w.write != Usage::Zero && vplus(decl.family, w, rest) == Some(full.usage));
                if !write_found {
                    return self.fail(rule, format!("no write usage W with W ⊎ {rest} = {}", full.usage));
                }
                let others_ok = p.regions.iter().all(|(s, e)| s == &r || d.regions.get(s) == Some(e))
                    && d.regions.iter().all(|(s, e)| {
                        s == &r || p.regions.contains(s) || self.family(s).is_some_and(|f| e.usage == neutral(f))
                    });
                if !others_ok {
                    return self.fail(rule, "other regions must come from the value");
                }
                if self.mode.confluent() && volatile && full.usage.read == Usage::Many {
                    return self.fail(rule, "volatile writes need v' ≠ ∞ under confluence");
                }
                if !below(&dom, &p.ty, &a) {
                    return self.fail(rule, format!("stored value has type {} not below {a}", p.ty));
                }
                let (ty, e) = match rule {
                    Rule::Set | Rule::Pset => (
                        Type::One,
                        if self.mode.effects() { Effect::single(r.clone()) } else { none },
                    ),
                    _ => (Type::Behaviour, none),
                };
                if d.ty != ty || d.effect != e {
                    return self.fail(rule, format!("expected ({ty}, {e})"));
                }
            }
            (Term::Par(a, b), Rule::Par | Rule::ParStore | Rule::StorePar) => {
                let (pa, pb) = (&d.premises[0], &d.premises[1]);
                self.with(0, |s| s.node(a, pa))?;
                self.with(1, |s| s.node(b, pb))?;
                if !Self::same_vars(&d.vars, Self::gsum(&pa.vars, &pb.vars)) {
                    return self.fail(rule, "Γ is not the sum of the premises");
                }
                if self.rsum(&pa.regions, &pb.regions).as_ref() != Some(&d.regions) {
                    return self.fail(rule, "R is not the sum of the premises");
                }
                let (ty, e) = match rule {
                    Rule::ParStore if b.is_store() => (pa.ty.clone(), pa.effect.clone()),
                    Rule::StorePar if a.is_store() && !b.is_store() => (pb.ty.clone(), pb.effect.clone()),
                    Rule::Par if !a.is_store() && !b.is_store() => {
                        (Type::Behaviour, pa.effect.union(&pb.effect))
                    }
                    _ => return self.fail(rule, "this rule does not fit the shape of the composition"),
                };
                if d.ty != ty || d.effect != e {
                    return self.fail(rule, format!("expected ({ty}, {e})"));
                }
            }
            _ => return self.fail(rule, format!("rule does not match the term `{t}`")),
        }
        Ok(())
    }
}
