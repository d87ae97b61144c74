use std::fmt::Write;

use super::{print_type, Name, StoreKind, Term, Var};

/// True iff `a` and `b` differ only in the names of bound variables.
pub fn alpha_equiv(a: &Term, b: &Term) -> bool {
    eq(a, b, &mut Vec::new())
}

/// Pairs of binders in scope, innermost last.
fn same_var(x: &Var, y: &Var, env: &[(&Name, &Name)]) -> bool {
    if x.region != y.region {
        return false;
    }
    for (l, r) in env.iter().rev() {
        let (hit_l, hit_r) = (*l == &x.name, *r == &y.name);
        if hit_l || hit_r {
            return hit_l && hit_r;
        }
    }
    x.name == y.name
}

fn eq<'a>(a: &'a Term, b: &'a Term, env: &mut Vec<(&'a Name, &'a Name)>) -> bool {
    match (a, b) {
        (Term::Unit, Term::Unit) => true,
        (Term::Var(x), Term::Var(y)) | (Term::Get(x), Term::Get(y)) => same_var(x, y, env),
        (Term::Set(x, v), Term::Set(y, w)) | (Term::Pset(x, v), Term::Pset(y, w)) => {
            same_var(x, y, env) && eq(v, w, env)
        }
        (Term::Store(x, k, v), Term::Store(y, l, w)) => k == l && same_var(x, y, env) && eq(v, w, env),
        (Term::Lam(x, s, m), Term::Lam(y, t, n)) => {
            s == t && {
                env.push((x, y));
                let ok = eq(m, n, env);
                env.pop();
                ok
            }
        }
        (Term::Nu(x, r, s, m), Term::Nu(y, q, t, n)) => {
            r == q && s == t && {
                env.push((x, y));
                let ok = eq(m, n, env);
                env.pop();
                ok
            }
        }
        (Term::LetBang(x, m1, n1), Term::LetBang(y, m2, n2)) => {
            eq(m1, m2, env) && {
                env.push((x, y));
                let ok = eq(n1, n2, env);
                env.pop();
                ok
            }
        }
        (Term::App(a1, b1), Term::App(a2, b2)) | (Term::Par(a1, b1), Term::Par(a2, b2)) => {
            eq(a1, a2, env) && eq(b1, b2, env)
        }
        (Term::Bang(m), Term::Bang(n)) => eq(m, n, env),
        _ => false,
    }
}

/// A hashable key equal for alpha-equivalent terms (nameless encoding).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct AlphaKey(pub String);

impl AlphaKey {
    pub fn of(t: &Term) -> AlphaKey {
        AlphaKey(nameless(t, &mut |n: &Name| n.to_string()))
    }
}

/// Nameless rendering of `t`; free names are rendered by `free`.
pub fn nameless(t: &Term, free: &mut dyn FnMut(&Name) -> String) -> String {
    let mut out = String::new();
    walk(t, &mut Vec::new(), free, &mut out);
    out
}

fn occ(v: &Var, env: &[&Name], free: &mut dyn FnMut(&Name) -> String, out: &mut String) {
    match env.iter().rev().position(|b| *b == &v.name) {
        Some(i) => {
            let _ = write!(out, "%{i}");
        }
        None => {
            let _ = write!(out, "'{}'", free(&v.name));
        }
    }
    if let Some(r) = &v.region {
        let _ = write!(out, "@{r}");
    }
}

fn walk<'a>(
    t: &'a Term,
    env: &mut Vec<&'a Name>,
    free: &mut dyn FnMut(&Name) -> String,
    out: &mut String,
) {
    match t {
        Term::Unit => out.push('*'),
        Term::Var(v) => occ(v, env, free, out),
        Term::Get(v) => {
            out.push_str("get(");
            occ(v, env, free, out);
            out.push(')');
        }
        Term::Set(v, p) | Term::Pset(v, p) | Term::Store(v, _, p) => {
            out.push_str(match t {
                Term::Set(..) => "set(",
                Term::Pset(..) => "pset(",
                Term::Store(_, StoreKind::Volatile, _) => "vst(",
                _ => "pst(",
            });
            occ(v, env, free, out);
            out.push(',');
            walk(p, env, free, out);
            out.push(')');
        }
        Term::Lam(x, a, b) => {
            let _ = write!(out, "(L{}.", print_type(a));
            env.push(x);
            walk(b, env, free, out);
            env.pop();
            out.push(')');
        }
        Term::Nu(x, r, a, b) => {
            let _ = write!(out, "(N{r}:{}.", print_type(a));
            env.push(x);
            walk(b, env, free, out);
            env.pop();
            out.push(')');
        }
        Term::LetBang(x, m, n) => {
            out.push_str("(let ");
            walk(m, env, free, out);
            out.push('.');
            env.push(x);
            walk(n, env, free, out);
            env.pop();
            out.push(')');
        }
        Term::App(a, b) => {
            out.push_str("(@");
            walk(a, env, free, out);
            out.push(' ');
            walk(b, env, free, out);
            out.push(')');
        }
        Term::Par(a, b) => {
            out.push_str("(|");
            walk(a, env, free, out);
            out.push(' ');
            walk(b, env, free, out);
            out.push(')');
        }
        Term::Bang(m) => {
            out.push('!');
            walk(m, env, free, out);
        }
    }
}
