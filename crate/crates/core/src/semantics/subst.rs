use std::collections::BTreeSet;

use crate::syntax::{Name, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("cannot substitute `{value}` for `{var}`: `{var}` is used as an address")]
    NonAddress { var: Name, value: Box<Term> },
}

/// `[v/x]t`, renaming bound variables of `t` that would capture a free name of `v`.
pub fn subst(t: &Term, x: &Name, v: &Term) -> Result<Term, SubstError> {
    let fv = v.free_vars();
    go(t, x, v, &fv)
}

/// Renames the free occurrences of `from` in `t` to `to`.
pub fn rename(t: &Term, from: &Name, to: &Name) -> Term {
    subst(t, from, &Term::Var(Var::new(to.clone()))).expect("a variable fits every position")
}

fn address(a: &Var, x: &Name, v: &Term) -> Result<Var, SubstError> {
    if &a.name != x {
        return Ok(a.clone());
    }
    match v {
        Term::Var(y) => Ok(Var { name: y.name.clone(), region: y.region.clone().or(a.region.clone()) }),
        _ => Err(SubstError::NonAddress { var: x.clone(), value: Box::new(v.clone()) }),
    }
}

/// Binder `y` over `body`: renamed when it would capture a free name of the value.
fn under(
    y: &Name,
    body: &Term,
    x: &Name,
    v: &Term,
    fv: &BTreeSet<Name>,
) -> Result<(Name, Term), SubstError> {
    if y == x {
        return Ok((y.clone(), body.clone()));
    }
    let body_fv = body.free_vars();
    if !body_fv.contains(x) {
        return Ok((y.clone(), body.clone()));
    }
    if fv.contains(y) {
        let mut taken = BTreeSet::new();
        body.all_names(&mut taken);
        v.all_names(&mut taken);
        taken.insert(x.clone());
        let y2 = y.fresh(|n| taken.contains(n));
        let body = rename(body, y, &y2);
        return Ok((y2, go(&body, x, v, fv)?));
    }
    Ok((y.clone(), go(body, x, v, fv)?))
}

fn go(t: &Term, x: &Name, v: &Term, fv: &BTreeSet<Name>) -> Result<Term, SubstError> {
    Ok(match t {
        Term::Unit => Term::Unit,
        Term::Var(a) if &a.name == x => match v {
            // keep the decoration of the occurrence when a variable replaces it
            Term::Var(b) => Term::Var(Var { name: b.name.clone(), region: b.region.clone().or(a.region.clone()) }),
            _ => v.clone(),
        },
        Term::Var(_) => t.clone(),
        Term::Get(a) => Term::Get(address(a, x, v)?),
        Term::Set(a, p) => Term::Set(address(a, x, v)?, Box::new(go(p, x, v, fv)?)),
        Term::Pset(a, p) => Term::Pset(address(a, x, v)?, Box::new(go(p, x, v, fv)?)),
        Term::Store(a, k, p) => Term::Store(address(a, x, v)?, *k, Box::new(go(p, x, v, fv)?)),
        Term::App(a, b) => Term::app(go(a, x, v, fv)?, go(b, x, v, fv)?),
        Term::Par(a, b) => Term::par(go(a, x, v, fv)?, go(b, x, v, fv)?),
        Term::Bang(a) => Term::bang(go(a, x, v, fv)?),
        Term::Lam(y, a, b) => {
            let (y, b) = under(y, b, x, v, fv)?;
            Term::Lam(y, a.clone(), Box::new(b))
        }
        Term::Nu(y, r, a, b) => {
            let (y, b) = under(y, b, x, v, fv)?;
            Term::Nu(y, r.clone(), a.clone(), Box::new(b))
        }
        Term::LetBang(y, m, n) => {
            let m = go(m, x, v, fv)?;
            let (y, n) = under(y, n, x, v, fv)?;
            Term::LetBang(y, Box::new(m), Box::new(n))
        }
    })
}
