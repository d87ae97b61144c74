use std::fmt::Write;

use super::{SourceUnit, StoreKind, Term, Type, Var};
use crate::syntax::RegionKind;

pub fn print_type(t: &Type) -> String {
    let mut s = String::new();
    ty(t, false, &mut s);
    s
}

fn ty(t: &Type, prefix: bool, out: &mut String) {
    match t {
        Type::One => out.push('1'),
        Type::Behaviour => out.push('B'),
        Type::Arrow(a, e, b) => {
            if prefix {
                out.push('(');
            }
            ty(a, true, out);
            if e.is_empty() {
                out.push_str(" -o ");
            } else {
                let regions: Vec<&str> = e.iter().map(|r| r.as_str()).collect();
                let _ = write!(out, " -{{{}}}> ", regions.join(","));
            }
            ty(b, false, out);
            if prefix {
                out.push(')');
            }
        }
        Type::Bang(a) => {
            out.push('!');
            ty(a, true, out);
        }
        Type::Reg(r, a) => {
            let _ = write!(out, "Reg[{r}]");
            ty(a, true, out);
        }
    }
}

pub fn print_term(t: &Term) -> String {
    let mut s = String::new();
    term(t, false, true, &mut s);
    s
}

fn var(v: &Var, out: &mut String) {
    out.push_str(v.name.as_str());
    if let Some(r) = &v.region {
        let _ = write!(out, "@{r}");
    }
}

/// `arg`: the term sits in argument position of an application.
/// `tail`: nothing follows it before a closing delimiter.
fn term(t: &Term, arg: bool, tail: bool, out: &mut String) {
    let open_right = matches!(t, Term::Lam(..) | Term::LetBang(..) | Term::Nu(..) | Term::Store(..));
    if (open_right && !tail) || (arg && matches!(t, Term::App(..))) {
        out.push('(');
        term(t, false, true, out);
        out.push(')');
        return;
    }
    match t {
        Term::Unit => out.push('*'),
        Term::Var(v) => var(v, out),
        Term::Lam(x, a, b) => {
            let _ = write!(out, "fun {x}:{}. ", print_type(a));
            term(b, false, true, out);
        }
        Term::App(f, a) => {
            term(f, false, false, out);
            out.push(' ');
            term(a, true, tail, out);
        }
        Term::Bang(m) => {
            out.push('!');
            term(m, true, tail, out);
        }
        Term::LetBang(x, m, n) => {
            let _ = write!(out, "let !{x} = ");
            term(m, false, false, out);
            out.push_str(" in ");
            term(n, false, true, out);
        }
        Term::Nu(x, r, a, b) => {
            let _ = write!(out, "nu {x}@{r}:{}. ", print_type(a));
            term(b, false, true, out);
        }
        Term::Get(x) => {
            out.push_str("get(");
            var(x, out);
            out.push(')');
        }
        Term::Set(x, v) | Term::Pset(x, v) => {
            out.push_str(if matches!(t, Term::Set(..)) { "set(" } else { "pset(" });
            var(x, out);
            out.push_str(", ");
            term(v, false, true, out);
            out.push(')');
        }
        Term::Par(a, b) => {
            out.push('(');
            term(a, false, false, out);
            out.push_str(" | ");
            term(b, false, true, out);
            out.push(')');
        }
        Term::Store(x, k, v) => {
            out.push_str("store ");
            var(x, out);
            out.push_str(match k {
                StoreKind::Volatile => " <- ",
                StoreKind::Persistent => " <= ",
            });
            term(v, false, tail, out);
        }
    }
}

pub fn print_unit(u: &SourceUnit) -> String {
    let mut s = String::new();
    for d in &u.regions {
        let kind = match d.kind {
            RegionKind::Volatile => "volatile",
            RegionKind::Persistent => "persistent",
        };
        let _ = writeln!(
            s,
            "region {} {kind} family {} : {};",
            d.name,
            d.family.keyword(),
            print_type(&d.content)
        );
    }
    for d in &u.free {
        let usage = if d.usage == crate::usage::Usage::One { "aff" } else { "exp" };
        let _ = writeln!(s, "free {} {usage} : {};", d.name, print_type(&d.ty));
    }
    let _ = writeln!(s, "main {}", print_term(&u.main));
    s
}
