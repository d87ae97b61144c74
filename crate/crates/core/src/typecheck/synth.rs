use std::collections::BTreeSet;

use super::{check_subtype, CheckMode, Derivation, Judgement, Rule, TypeError, TypeErrorKind};
use crate::syntax::{
    Effect, Name, Region, RegionDecl, RegionKind, SourceUnit, Span, StoreKind, Term, Type, Var,
};
use crate::usage::{
    aff_ctx, ctx_sum, is_aff_hyp, regionctx_sum, Hyp, RegionContext, RegionEntry, SumClash, Usage,
    UsageFamily, UsageVec, VarContext,
};
use crate::wellformed::{compat, region_closure, wf_region_ctx, FormationError};

use TypeErrorKind::*;

pub(super) struct Checker<'a> {
    unit: &'a SourceUnit,
    mode: CheckMode,
    /// Bound variables in scope, innermost last.
    scope: Vec<(Name, Usage, Type)>,
    /// Pre-order index of the node being visited, for source positions.
    cursor: usize,
}

impl<'a> Checker<'a> {
    pub(super) fn new(unit: &'a SourceUnit, mode: CheckMode) -> Self {
        Checker { unit, mode, scope: Vec::new(), cursor: 0 }
    }

    fn span(&self, idx: usize) -> Option<Span> {
        self.unit.spans.get(idx).copied()
    }

    fn err(&self, idx: usize, kind: TypeErrorKind, explanation: impl Into<String>) -> TypeError {
        TypeError { kind, span: self.span(idx), explanation: explanation.into() }
    }

    fn decl(&self, r: &Region) -> &'a RegionDecl {
        self.unit.region(r).expect("regions are checked before synthesis")
    }

    pub(super) fn check(mut self) -> Result<Judgement, TypeError> {
        self.formation()?;
        self.cursor = 0;
        let d = self.synth(&self.unit.main)?;
        Ok(Judgement {
            mode: self.mode,
            vars: d.vars.clone(),
            regions: d.regions.clone(),
            ty: d.ty.clone(),
            effect: d.effect.clone(),
            derivation: d,
        })
    }

    // ---- formation -------------------------------------------------------

    fn formation(&mut self) -> Result<(), TypeError> {
        let u = self.unit;
        let formation = |e: FormationError| TypeError {
            kind: FormationFailure,
            span: None,
            explanation: e.to_string(),
        };
        wf_region_ctx(&u.regions, self.mode.formation()).map_err(formation)?;
        if !self.mode.effects() {
            if let Some(d) = u.regions.iter().find(|d| !d.content.is_effect_free()) {
                return Err(formation(FormationError {
                    subject: d.name.to_string(),
                    message: format!(
                        "latent effects are not allowed in {} mode: {}",
                        self.mode, d.content
                    ),
                }));
            }
        }
        let mut seen = BTreeSet::new();
        for d in &u.free {
            if !seen.insert(&d.name) {
                return Err(formation(FormationError {
                    subject: d.name.to_string(),
                    message: "variable declared twice".into(),
                }));
            }
            self.annotation_ok(&d.ty, None)
                .map_err(|e| TypeError { explanation: format!("{}: {}", d.name, e.explanation), ..e })?;
        }
        if self.mode.confluent() {
            if let Some(d) = u.regions.iter().find(|d| d.family == UsageFamily::Unrestricted) {
                return Err(TypeError {
                    kind: FamilyViolation,
                    span: None,
                    explanation: format!(
                        "region `{}` uses the unrestricted family, which is excluded in {} mode",
                        d.name, self.mode
                    ),
                });
            }
        }
        self.annotations(&u.main)
    }

    fn annotation_ok(&self, ty: &Type, idx: Option<usize>) -> Result<(), TypeError> {
        let span = idx.and_then(|i| self.span(i));
        if !self.mode.effects() && !ty.is_effect_free() {
            return Err(TypeError {
                kind: FormationFailure,
                span,
                explanation: format!("latent effects are not allowed in {} mode: {ty}", self.mode),
            });
        }
        compat(&self.unit.regions, ty).map_err(|e| TypeError {
            kind: FormationFailure,
            span,
            explanation: e.to_string(),
        })
    }

    fn annotations(&mut self, t: &Term) -> Result<(), TypeError> {
        let idx = self.cursor;
        self.cursor += 1;
        match t {
            Term::Lam(_, a, _) => self.annotation_ok(a, Some(idx))?,
            Term::Nu(_, r, a, _) => self.annotation_ok(&Type::Reg(r.clone(), Box::new(a.clone())), Some(idx))?,
            _ => {}
        }
        for c in t.children() {
            self.annotations(c)?;
        }
        Ok(())
    }

    // ---- synthesis -------------------------------------------------------

    fn lookup(&self, idx: usize, x: &Var) -> Result<(Usage, Type), TypeError> {
        if let Some((_, u, a)) = self.scope.iter().rev().find(|(n, _, _)| n == &x.name) {
            return Ok((*u, a.clone()));
        }
        if let Some(d) = self.unit.free.iter().find(|d| d.name == x.name) {
            return Ok((d.usage, d.ty.clone()));
        }
        Err(self.err(idx, FormationFailure, format!("variable `{}` is not declared", x.name)))
    }

    /// Neutral entries for every region `ty` depends on.
    fn padding(&self, ty: &Type) -> RegionContext {
        let mut seeds = BTreeSet::new();
        ty.regions(&mut seeds);
        self.neutral(seeds)
    }

    fn neutral(&self, seeds: BTreeSet<Region>) -> RegionContext {
        let mut out = RegionContext::new();
        for r in region_closure(&self.unit.regions, seeds) {
            let d = self.decl(&r);
            out.insert(
                r,
                RegionEntry { usage: d.family.neutral(), kind: d.kind, content: d.content.clone() },
            );
        }
        out
    }

    fn demand(&self, r: &Region, v: UsageVec) -> RegionContext {
        let d = self.decl(r);
        let mut out = self.neutral(BTreeSet::from([r.clone()]));
        out.insert(r.clone(), RegionEntry { usage: v, kind: d.kind, content: d.content.clone() });
        out
    }

    fn clash(&self, idx: usize, c: SumClash) -> TypeError {
        self.err(idx, UsageClash, c.to_string())
    }

    fn rsum(&self, idx: usize, a: &RegionContext, b: &RegionContext) -> Result<RegionContext, TypeError> {
        regionctx_sum(a, b).map_err(|c| self.clash(idx, c))
    }

    fn vsum(&self, idx: usize, a: &VarContext, b: &VarContext) -> Result<VarContext, TypeError> {
        ctx_sum(a, b).map_err(|c| self.clash(idx, c))
    }

    fn eff(&self, r: &Region) -> Effect {
        if self.mode.effects() {
            Effect::single(r.clone())
        } else {
            Effect::empty()
        }
    }

    fn subsumes(&self, idx: usize, dom: &RegionContext, got: &Type, want: &Type, what: &str) -> Result<(), TypeError> {
        let dom: BTreeSet<Region> = dom.regions().cloned().collect();
        if check_subtype(&dom, got, want) {
            return Ok(());
        }
        let kind = if got.erase_effects() == want.erase_effects() { SubtypeFailure } else { ShapeMismatch };
        Err(self.err(idx, kind, format!("{what} has type {got} but {want} is expected")))
    }

    fn node(rule: Rule, vars: VarContext, regions: RegionContext, ty: Type, effect: Effect) -> Derivation {
        Derivation { rule, vars, regions, ty, effect, binder: None, premises: Vec::new() }
    }

    fn bind<T>(&mut self, x: &Name, u: Usage, ty: &Type, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((x.clone(), u, ty.clone()));
        let out = f(self);
        self.scope.pop();
        out
    }

    /// The address `x` must have a region type; returns its region, content and hypothesis.
    fn address(&self, idx: usize, x: &Var) -> Result<(Region, Type, Usage, Type), TypeError> {
        let (u, ty) = self.lookup(idx, x)?;
        match &ty {
            Type::Reg(r, a) => Ok((r.clone(), (**a).clone(), u, ty.clone())),
            other => Err(self.err(
                idx,
                ShapeMismatch,
                format!("`{}` is used as an address but has type {other}", x.name),
            )),
        }
    }

    fn synth(&mut self, t: &Term) -> Result<Derivation, TypeError> {
        let idx = self.cursor;
        self.cursor += 1;
        match t {
            Term::Unit => Ok(Self::node(Rule::Unit, VarContext::new(), RegionContext::new(), Type::One, Effect::empty())),
            Term::Var(x) => {
                let (u, a) = self.lookup(idx, x)?;
                let regions = self.padding(&a);
                Ok(Self::node(
                    Rule::Var,
                    VarContext::singleton(x.name.clone(), u, a.clone()),
                    regions,
                    a,
                    Effect::empty(),
                ))
            }
            Term::Lam(x, a, body) => {
                let d = self.bind(x, Usage::One, a, |s| s.synth(body))?;
                let mut vars = d.vars.clone();
                vars.remove(x);
                let regions = self.rsum(idx, &d.regions, &self.padding(a))?;
                let ty = Type::arrow(a.clone(), d.effect.clone(), d.ty.clone());
                let mut n = Self::node(Rule::Lam, vars, regions, ty, Effect::empty());
                n.binder = Some((x.clone(), a.clone()));
                n.premises.push(d);
                Ok(n)
            }
            Term::App(f, a) => {
                let df = self.synth(f)?;
                let da = self.synth(a)?;
                let (dom, latent, cod) = match &df.ty {
                    Type::Arrow(dom, e, cod) => ((**dom).clone(), e.clone(), (**cod).clone()),
                    other => {
                        return Err(self.err(idx, ShapeMismatch, format!("cannot apply a term of type {other}")))
                    }
                };
                let vars = self.vsum(idx, &df.vars, &da.vars)?;
                let regions = self.rsum(idx, &df.regions, &da.regions)?;
                self.subsumes(idx, &regions, &da.ty, &dom, "the argument")?;
                let effect = df.effect.union(&da.effect).union(&latent);
                let mut n = Self::node(Rule::App, vars, regions, cod, effect);
                n.premises = vec![df, da];
                Ok(n)
            }
            Term::Bang(m) => {
                let d = self.synth(m)?;
                if d.ty == Type::Behaviour {
                    return Err(self.err(idx, ShapeMismatch, "cannot promote a term of type B"));
                }
                if aff_ctx(&d.regions, &d.vars).0 {
                    let culprit = d
                        .vars
                        .iter()
                        .find(|(_, (u, _))| is_aff_hyp(Hyp::Var(*u)))
                        .map(|(x, (u, a))| format!("variable {x}:({u}, {a})"))
                        .or_else(|| {
                            d.regions
                                .iter()
                                .find(|(_, e)| is_aff_hyp(Hyp::Region(e.usage, e.kind)))
                                .map(|(r, e)| format!("region {r}:({}, {})", e.usage, e.content))
                        })
                        .unwrap_or_default();
                    return Err(self.err(
                        idx,
                        AffineUnderBang,
                        format!("cannot promote `{m}`: it depends on the affine hypothesis {culprit}"),
                    ));
                }
                let mut n = Self::node(Rule::Promote, d.vars.clone(), d.regions.clone(), Type::bang(d.ty.clone()), d.effect.clone());
                n.premises.push(d);
                Ok(n)
            }
            Term::LetBang(x, m, body) => {
                let dm = self.synth(m)?;
                let a = match &dm.ty {
                    Type::Bang(a) => (**a).clone(),
                    other => {
                        return Err(self.err(idx, ShapeMismatch, format!("let ! expects a banged term, found type {other}")))
                    }
                };
                let dn = self.bind(x, Usage::Many, &a, |s| s.synth(body))?;
                let mut body_vars = dn.vars.clone();
                body_vars.remove(x);
                let vars = self.vsum(idx, &dm.vars, &body_vars)?;
                let regions = self.rsum(idx, &dm.regions, &dn.regions)?;
                let regions = self.rsum(idx, &regions, &self.padding(&a))?;
                let effect = dm.effect.union(&dn.effect);
                let mut n = Self::node(Rule::LetBang, vars, regions, dn.ty.clone(), effect);
                n.binder = Some((x.clone(), a));
                n.premises = vec![dm, dn];
                Ok(n)
            }
            Term::Nu(x, r, a, body) => {
                let ty = Type::Reg(r.clone(), Box::new(a.clone()));
                let d = self.bind(x, Usage::Many, &ty, |s| s.synth(body))?;
                let mut vars = d.vars.clone();
                vars.remove(x);
                let regions = self.rsum(idx, &d.regions, &self.padding(&ty))?;
                let mut n = Self::node(Rule::Nu, vars, regions, d.ty.clone(), d.effect.clone());
                n.binder = Some((x.clone(), ty));
                n.premises.push(d);
                Ok(n)
            }
            Term::Get(x) => {
                let (r, content, u, ty) = self.address(idx, x)?;
                let family = self.decl(&r).family;
                let regions = self.rsum(idx, &self.demand(&r, family.read_demand()), &self.padding(&ty))?;
                Ok(Self::node(
                    Rule::Get,
                    VarContext::singleton(x.name.clone(), u, ty),
                    regions,
                    content,
                    self.eff(&r),
                ))
            }
            Term::Set(x, v) | Term::Pset(x, v) | Term::Store(x, _, v) => {
                let (r, content, u, ty) = self.address(idx, x)?;
                let decl = self.decl(&r);
                let (wanted, rule, res_ty, effect) = match t {
                    Term::Set(..) => (RegionKind::Volatile, Rule::Set, Type::One, self.eff(&r)),
                    Term::Pset(..) => (RegionKind::Persistent, Rule::Pset, Type::One, self.eff(&r)),
                    Term::Store(_, StoreKind::Volatile, _) => {
                        (RegionKind::Volatile, Rule::StoreVolatile, Type::Behaviour, Effect::empty())
                    }
                    _ => (RegionKind::Persistent, Rule::StorePersistent, Type::Behaviour, Effect::empty()),
                };
                if decl.kind != wanted {
                    return Err(self.err(
                        idx,
                        StoreKindMismatch,
                        format!("`{}` lives in {:?} region `{r}` but `{t}` needs a {:?} one", x.name, decl.kind, wanted)
                            .to_lowercase(),
                    ));
                }
                let dv = self.synth(v)?;
                let own = self.rsum(idx, &self.demand(&r, decl.family.write_demand()), &self.padding(&ty))?;
                let regions = self.rsum(idx, &own, &dv.regions)?;
                let vars = self.vsum(idx, &VarContext::singleton(x.name.clone(), u, ty), &dv.vars)?;
                self.subsumes(idx, &regions, &dv.ty, &content, "the stored value")?;
                if self.mode.confluent() && decl.kind == RegionKind::Volatile {
                    let v = regions.get(&r).expect("demanded").usage;
                    if v.read == Usage::Many {
                        return Err(self.err(
                            idx,
                            ConfluenceRestriction,
                            format!(
                                "volatile region `{r}` is written with usage {v}; confluence needs a read usage other than ∞"
                            ),
                        ));
                    }
                }
                let mut n = Self::node(rule, vars, regions, res_ty, effect);
                n.premises.push(dv);
                Ok(n)
            }
            Term::Par(a, b) => {
                let da = self.synth(a)?;
                let db = self.synth(b)?;
                let vars = self.vsum(idx, &da.vars, &db.vars)?;
                let regions = self.rsum(idx, &da.regions, &db.regions)?;
                let (rule, ty, effect) = if b.is_store() {
                    (Rule::ParStore, da.ty.clone(), da.effect.clone())
                } else if a.is_store() {
                    (Rule::StorePar, db.ty.clone(), db.effect.clone())
                } else {
                    (Rule::Par, Type::Behaviour, da.effect.union(&db.effect))
                };
                let mut n = Self::node(rule, vars, regions, ty, effect);
                n.premises = vec![da, db];
                Ok(n)
            }
        }
    }
}
