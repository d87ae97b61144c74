//! Checking in the intuitionistic type and effect system.

use std::collections::BTreeSet;

use super::iterm::ITerm;
use crate::syntax::{Effect, Name, Region, Type};
use crate::typecheck::check_subtype;
use crate::wellformed::FormationMode;

/// Region context and variable context of the target system.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IContext {
    pub regions: Vec<(Region, Type)>,
    pub vars: Vec<(Name, Type)>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct IError(pub String);

fn fail<T>(msg: impl Into<String>) -> Result<T, IError> {
    Err(IError(msg.into()))
}

impl IContext {
    fn content(&self, r: &Region) -> Option<&Type> {
        self.regions.iter().find(|(s, _)| s == r).map(|(_, a)| a)
    }

    fn dom(&self) -> BTreeSet<Region> {
        self.regions.iter().map(|(r, _)| r.clone()).collect()
    }

    fn type_ok(&self, t: &Type, upto: usize) -> bool {
        let scope = &self.regions[..upto];
        match t {
            Type::One | Type::Behaviour => true,
            Type::Bang(_) => false,
            Type::Reg(r, a) => scope.iter().any(|(s, b)| s == r && b == a.as_ref()),
            Type::Arrow(a, e, b) => {
                self.type_ok(a, upto)
                    && self.type_ok(b, upto)
                    && e.iter().all(|r| scope.iter().any(|(s, _)| s == r))
            }
        }
    }

    /// `R ⊢` and `R ⊢ Γ`, stratified (each content over earlier regions) or not.
    pub fn well_formed(&self, mode: FormationMode) -> Result<(), IError> {
        for (i, (r, a)) in self.regions.iter().enumerate() {
            if self.regions[..i].iter().any(|(s, _)| s == r) {
                return fail(format!("region {r} declared twice"));
            }
            let upto = match mode {
                FormationMode::Stratified => i,
                FormationMode::Unstratified => self.regions.len(),
            };
            if !self.type_ok(a, upto) || *a == Type::Behaviour {
                return fail(format!("content {a} of region {r} is not well formed"));
            }
        }
        for (x, a) in &self.vars {
            if !self.type_ok(a, self.regions.len()) {
                return fail(format!("type {a} of {x} is not well formed"));
            }
        }
        Ok(())
    }
}

/// Checks `t` under `ctx`, returning its least type and effect.
pub fn i_check(ctx: &IContext, mode: FormationMode, t: &ITerm) -> Result<(Type, Effect), IError> {
    ctx.well_formed(mode)?;
    let mut env: Vec<(Name, Type)> = ctx.vars.clone();
    synth(ctx, &mut env, t)
}

fn below(ctx: &IContext, a: &Type, b: &Type) -> bool {
    check_subtype(&ctx.dom(), a, b)
}

fn value(ctx: &IContext, env: &mut Vec<(Name, Type)>, v: &ITerm) -> Result<Type, IError> {
    let (a, e) = synth(ctx, env, v)?;
    if !e.is_empty() {
        return fail(format!("{v} should have no effect"));
    }
    Ok(a)
}

fn synth(ctx: &IContext, env: &mut Vec<(Name, Type)>, t: &ITerm) -> Result<(Type, Effect), IError> {
    let none = Effect::empty();
    match t {
        ITerm::Unit => Ok((Type::One, none)),
        ITerm::Var(x) => match env.iter().rev().find(|(y, _)| y == x) {
            Some((_, a)) => Ok((a.clone(), none)),
            None => fail(format!("unbound variable {x}")),
        },
        ITerm::Region(r) => match ctx.content(r) {
            Some(a) => Ok((Type::Reg(r.clone(), Box::new(a.clone())), none)),
            None => fail(format!("unknown region {r}")),
        },
        ITerm::Lam(x, Some(a), body) => {
            env.push((x.clone(), a.clone()));
            let res = synth(ctx, env, body);
            env.pop();
            let (b, e) = res?;
            Ok((Type::arrow(a.clone(), e, b), none))
        }
        ITerm::Lam(x, None, _) => fail(format!("cannot infer the type of the parameter {x}")),
        ITerm::App(f, arg) => {
            let (a, e3) = synth(ctx, env, arg)?;
            if let ITerm::Lam(x, None, body) = &**f {
                // the encoding of let !: the parameter takes the argument's type
                env.push((x.clone(), a));
                let res = synth(ctx, env, body);
                env.pop();
                let (b, e2) = res?;
                return Ok((b, e2.union(&e3)));
            }
            let (ft, e1) = synth(ctx, env, f)?;
            match ft {
                Type::Arrow(dom, e2, cod) => {
                    if !below(ctx, &a, &dom) {
                        return fail(format!("argument of type {a} where {dom} is expected"));
                    }
                    Ok((*cod, e1.union(&e2).union(&e3)))
                }
                other => fail(format!("cannot apply a term of type {other}")),
            }
        }
        ITerm::Get(v) => match value(ctx, env, v)? {
            Type::Reg(r, a) => Ok((*a, Effect::single(r))),
            other => fail(format!("get of a term of type {other}")),
        },
        ITerm::Pset(v, w) => match value(ctx, env, v)? {
            Type::Reg(r, a) => {
                let b = value(ctx, env, w)?;
                if !below(ctx, &b, &a) {
                    return fail(format!("pset of {b} into a region holding {a}"));
                }
                Ok((Type::One, Effect::single(r)))
            }
            other => fail(format!("pset into a term of type {other}")),
        },
        ITerm::Store(r, v) => {
            let Some(a) = ctx.content(r).cloned() else {
                return fail(format!("unknown region {r}"));
            };
            let b = value(ctx, env, v)?;
            if !below(ctx, &b, &a) {
                return fail(format!("store of {b} into a region holding {a}"));
            }
            Ok((Type::Behaviour, none))
        }
        ITerm::Par(p, q) => {
            let (a, e) = synth(ctx, env, p)?;
            let (b, f) = synth(ctx, env, q)?;
            if q.is_store() {
                Ok((a, e))
            } else if p.is_store() {
                Ok((b, f))
            } else {
                Ok((Type::Behaviour, e.union(&f)))
            }
        }
    }
}
