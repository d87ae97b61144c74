//! Translation into an intuitionistic language with regions and effects.
//!
//! A well-typed program is first decorated: every variable whose type is a
//! reference `Reg[r] A` gets tagged with `r`. Forgetting then replaces tagged
//! variables by the region itself, drops `!`, `ν` and the store kind, turns
//! `let !x = M in N` into `(λx.N)(M)`, and merges `set` into `pset`.

mod icheck;
mod iterm;
mod simulate;

pub use icheck::{i_check, IContext, IError};
pub use iterm::{i_step_all, ikey, isubst, print_iterm, print_iterm_plain, IProgram, IStepKind, ITerm};
pub use simulate::{check_simulation, SimulationReport};

use crate::syntax::{Effect, SourceUnit, Term, Type, Var};
use crate::typecheck::{Derivation, Judgement};
use crate::wellformed::FormationMode;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("variable `{0}` is used as an address but carries no region")]
    UndecoratedRegionVariable(String),
    #[error("derivation does not match the term at {0}")]
    Mismatch(String),
}

/// Tags every variable occurrence of reference type with its region,
/// reading the types off `d` (which must be a derivation for `t`).
pub fn decorate(t: &Term, d: &Derivation) -> Result<Term, TranslateError> {
    let address = |x: &Var, d: &Derivation| -> Var {
        match d.vars.get(&x.name) {
            Some((_, Type::Reg(r, _))) => Var { name: x.name.clone(), region: Some(r.clone()) },
            _ => x.clone(),
        }
    };
    let prem = |i: usize| -> Result<&Derivation, TranslateError> {
        d.premises.get(i).ok_or_else(|| TranslateError::Mismatch(t.to_string()))
    };
    let b = Box::new;
    Ok(match t {
        Term::Unit => Term::Unit,
        Term::Var(x) => match &d.ty {
            Type::Reg(r, _) => Term::Var(Var { name: x.name.clone(), region: Some(r.clone()) }),
            _ => Term::Var(x.clone()),
        },
        Term::Lam(x, a, m) => Term::Lam(x.clone(), a.clone(), b(decorate(m, prem(0)?)?)),
        Term::App(f, a) => Term::App(b(decorate(f, prem(0)?)?), b(decorate(a, prem(1)?)?)),
        Term::Bang(m) => Term::Bang(b(decorate(m, prem(0)?)?)),
        Term::LetBang(x, m, n) => {
            Term::LetBang(x.clone(), b(decorate(m, prem(0)?)?), b(decorate(n, prem(1)?)?))
        }
        Term::Nu(x, r, a, m) => Term::Nu(x.clone(), r.clone(), a.clone(), b(decorate(m, prem(0)?)?)),
        Term::Get(x) => Term::Get(address(x, d)),
        Term::Set(x, v) => Term::Set(address(x, d), b(decorate(v, prem(0)?)?)),
        Term::Pset(x, v) => Term::Pset(address(x, d), b(decorate(v, prem(0)?)?)),
        Term::Store(x, k, v) => Term::Store(address(x, d), *k, b(decorate(v, prem(0)?)?)),
        Term::Par(p, q) => Term::Par(b(decorate(p, prem(0)?)?), b(decorate(q, prem(1)?)?)),
    })
}

/// Drops `!`; everything else keeps its shape.
pub fn forget_type(t: &Type) -> Type {
    match t {
        Type::One => Type::One,
        Type::Behaviour => Type::Behaviour,
        Type::Bang(a) => forget_type(a),
        Type::Arrow(a, e, b) => Type::Arrow(Box::new(forget_type(a)), e.clone(), Box::new(forget_type(b))),
        Type::Reg(r, a) => Type::Reg(r.clone(), Box::new(forget_type(a))),
    }
}

fn forget_var(x: &Var) -> ITerm {
    match &x.region {
        Some(r) => ITerm::Region(r.clone()),
        None => ITerm::Var(x.name.clone()),
    }
}

fn forget_address(x: &Var) -> Result<ITerm, TranslateError> {
    match &x.region {
        Some(r) => Ok(ITerm::Region(r.clone())),
        None => Err(TranslateError::UndecoratedRegionVariable(x.name.to_string())),
    }
}

/// The translation of a decorated term.
pub fn forget(t: &Term) -> Result<ITerm, TranslateError> {
    let b = Box::new;
    Ok(match t {
        Term::Unit => ITerm::Unit,
        Term::Var(x) => forget_var(x),
        Term::Lam(x, a, m) => ITerm::Lam(x.clone(), Some(forget_type(a)), b(forget(m)?)),
        Term::App(f, a) => ITerm::app(forget(f)?, forget(a)?),
        Term::Bang(m) => forget(m)?,
        Term::LetBang(x, m, n) => ITerm::app(ITerm::Lam(x.clone(), None, b(forget(n)?)), forget(m)?),
        Term::Nu(_, _, _, m) => forget(m)?,
        Term::Get(x) => ITerm::Get(b(forget_address(x)?)),
        Term::Set(x, v) | Term::Pset(x, v) => ITerm::Pset(b(forget_address(x)?), b(forget(v)?)),
        Term::Store(x, _, v) => match &x.region {
            Some(r) => ITerm::Store(r.clone(), b(forget(v)?)),
            None => return Err(TranslateError::UndecoratedRegionVariable(x.name.to_string())),
        },
        Term::Par(p, q) => ITerm::par(forget(p)?, forget(q)?),
    })
}

/// The target-side picture of a checked unit.
#[derive(Clone, Debug)]
pub struct Translation {
    pub context: IContext,
    pub term: ITerm,
    pub ty: Type,
    pub effect: Effect,
}

/// Decorates and forgets `u.main` along `j`, and translates the contexts.
/// Variables of reference type disappear from the variable context since
/// their occurrences have become regions.
pub fn translate(u: &SourceUnit, j: &Judgement) -> Result<Translation, TranslateError> {
    let decorated = decorate(&u.main, &j.derivation)?;
    let term = forget(&decorated)?;
    let regions = u.regions.iter().map(|d| (d.name.clone(), forget_type(&d.content))).collect();
    let vars = j
        .vars
        .iter()
        .filter(|(_, (_, a))| !matches!(a, Type::Reg(..)))
        .map(|(x, (_, a))| (x.clone(), forget_type(a)))
        .collect();
    Ok(Translation {
        context: IContext { regions, vars },
        term,
        ty: forget_type(&j.ty),
        effect: j.effect.clone(),
    })
}

/// How the translated judgement compares with the checked one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preservation {
    /// Same type and effect.
    Exact,
    /// The target derives a smaller type or effect.
    Subtype,
}

/// Checks the translation of a unit in the target system and compares the
/// outcome with the source judgement.
pub fn check_preservation(
    u: &SourceUnit,
    j: &Judgement,
    mode: FormationMode,
) -> Result<Preservation, String> {
    let tr = translate(u, j).map_err(|e| e.to_string())?;
    let (ty, eff) = i_check(&tr.context, mode, &tr.term).map_err(|e| e.to_string())?;
    if ty == tr.ty && eff == tr.effect {
        return Ok(Preservation::Exact);
    }
    let dom = u.regions.iter().map(|d| d.name.clone()).collect();
    if crate::typecheck::check_subtype_eff(&dom, (&ty, &eff), (&tr.ty, &tr.effect)) {
        Ok(Preservation::Subtype)
    } else {
        Err(format!("target derives {ty} with effect {eff}, source has {} with effect {}", tr.ty, tr.effect))
    }
}
