//! The intuitionistic target language: terms, reduction and equivalence.

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use crate::syntax::{print_type, Name, Region, Type};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ITerm {
    Unit,
    Var(Name),
    Region(Region),
    /// The annotation is absent for the abstractions that encode `let !`;
    /// those only ever occur applied.
    Lam(Name, Option<Type>, Box<ITerm>),
    App(Box<ITerm>, Box<ITerm>),
    Get(Box<ITerm>),
    Pset(Box<ITerm>, Box<ITerm>),
    Par(Box<ITerm>, Box<ITerm>),
    Store(Region, Box<ITerm>),
}

impl ITerm {
    pub fn app(f: ITerm, a: ITerm) -> ITerm {
        ITerm::App(Box::new(f), Box::new(a))
    }

    pub fn par(a: ITerm, b: ITerm) -> ITerm {
        ITerm::Par(Box::new(a), Box::new(b))
    }

    pub fn is_value(&self) -> bool {
        matches!(self, ITerm::Unit | ITerm::Var(_) | ITerm::Region(_) | ITerm::Lam(..))
    }

    pub fn is_store(&self) -> bool {
        match self {
            ITerm::Store(..) => true,
            ITerm::Par(a, b) => a.is_store() && b.is_store(),
            _ => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect(&mut Vec::new(), &mut out);
        out
    }

    fn collect<'a>(&'a self, bound: &mut Vec<&'a Name>, out: &mut BTreeSet<Name>) {
        match self {
            ITerm::Unit | ITerm::Region(_) => {}
            ITerm::Var(x) => {
                if !bound.contains(&x) {
                    out.insert(x.clone());
                }
            }
            ITerm::Lam(x, _, b) => {
                bound.push(x);
                b.collect(bound, out);
                bound.pop();
            }
            ITerm::App(a, b) | ITerm::Pset(a, b) | ITerm::Par(a, b) => {
                a.collect(bound, out);
                b.collect(bound, out);
            }
            ITerm::Get(a) | ITerm::Store(_, a) => a.collect(bound, out),
        }
    }

    fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            ITerm::Unit | ITerm::Region(_) => {}
            ITerm::Var(x) => {
                out.insert(x.clone());
            }
            ITerm::Lam(x, _, b) => {
                out.insert(x.clone());
                b.all_names(out);
            }
            ITerm::App(a, b) | ITerm::Pset(a, b) | ITerm::Par(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            ITerm::Get(a) | ITerm::Store(_, a) => a.all_names(out),
        }
    }
}

/// `[v/x]t`, capture-avoiding.
pub fn isubst(t: &ITerm, x: &Name, v: &ITerm) -> ITerm {
    let fv = v.free_vars();
    go(t, x, v, &fv)
}

fn go(t: &ITerm, x: &Name, v: &ITerm, fv: &BTreeSet<Name>) -> ITerm {
    match t {
        ITerm::Var(y) if y == x => v.clone(),
        ITerm::Unit | ITerm::Var(_) | ITerm::Region(_) => t.clone(),
        ITerm::Lam(y, a, b) => {
            if y == x || !b.free_vars().contains(x) {
                return t.clone();
            }
            if fv.contains(y) {
                let mut taken = BTreeSet::new();
                b.all_names(&mut taken);
                v.all_names(&mut taken);
                taken.insert(x.clone());
                let z = y.fresh(|n| taken.contains(n));
                let b = isubst(b, y, &ITerm::Var(z.clone()));
                return ITerm::Lam(z, a.clone(), Box::new(go(&b, x, v, fv)));
            }
            ITerm::Lam(y.clone(), a.clone(), Box::new(go(b, x, v, fv)))
        }
        ITerm::App(a, b) => ITerm::app(go(a, x, v, fv), go(b, x, v, fv)),
        ITerm::Pset(a, b) => ITerm::Pset(Box::new(go(a, x, v, fv)), Box::new(go(b, x, v, fv))),
        ITerm::Par(a, b) => ITerm::par(go(a, x, v, fv), go(b, x, v, fv)),
        ITerm::Get(a) => ITerm::Get(Box::new(go(a, x, v, fv))),
        ITerm::Store(r, a) => ITerm::Store(r.clone(), Box::new(go(a, x, v, fv))),
    }
}

// ---- printing -------------------------------------------------------------

/// Concrete syntax: the source grammar without `!`, `let !`, `nu` and
/// volatile stores, plus region literals written `@r`.
pub fn print_iterm(t: &ITerm) -> String {
    let mut s = String::new();
    write_term(t, &mut s, false, true);
    s
}

fn write_term(t: &ITerm, out: &mut String, arg: bool, tail: bool) {
    match t {
        ITerm::Unit => out.push('*'),
        ITerm::Var(x) => out.push_str(x.as_str()),
        ITerm::Region(r) => {
            let _ = write!(out, "@{r}");
        }
        ITerm::Lam(x, a, b) => {
            let open = arg || !tail;
            if open {
                out.push('(');
            }
            match a {
                Some(a) => {
                    let _ = write!(out, "fun {x}:{}. ", print_type(a));
                }
                None => {
                    let _ = write!(out, "fun {x}. ");
                }
            }
            write_term(b, out, false, true);
            if open {
                out.push(')');
            }
        }
        ITerm::App(f, a) => {
            if arg {
                out.push('(');
            }
            write_term(f, out, false, false);
            out.push(' ');
            write_term(a, out, true, arg || tail);
            if arg {
                out.push(')');
            }
        }
        ITerm::Get(v) => {
            out.push_str("get(");
            write_term(v, out, false, true);
            out.push(')');
        }
        ITerm::Pset(v, w) => {
            out.push_str("pset(");
            write_term(v, out, false, true);
            out.push_str(", ");
            write_term(w, out, false, true);
            out.push(')');
        }
        ITerm::Par(a, b) => {
            out.push('(');
            write_term(a, out, false, false);
            out.push_str(" | ");
            write_term(b, out, false, true);
            out.push(')');
        }
        ITerm::Store(r, v) => {
            let _ = write!(out, "(store @{r} <= ");
            write_term(v, out, true, true);
            out.push(')');
        }
    }
}

/// The notation of the printed examples: `λx.M`, regions as bare names,
/// application as `f(a)`, and a flat `|` chain at the top.
pub fn print_iterm_plain(t: &ITerm) -> String {
    fn chain<'a>(t: &'a ITerm, out: &mut Vec<&'a ITerm>) {
        match t {
            ITerm::Par(a, b) => {
                chain(a, out);
                chain(b, out);
            }
            _ => out.push(t),
        }
    }
    fn term(t: &ITerm) -> String {
        match t {
            ITerm::Unit => "*".into(),
            ITerm::Var(x) => x.to_string(),
            ITerm::Region(r) => r.to_string(),
            ITerm::Lam(x, _, b) => format!("λ{x}.{}", term(b)),
            ITerm::App(f, a) => {
                let f = match **f {
                    ITerm::Lam(..) | ITerm::Par(..) => format!("({})", term(f)),
                    _ => term(f),
                };
                format!("{f}({})", term(a))
            }
            ITerm::Get(v) => format!("get({})", term(v)),
            ITerm::Pset(v, w) => format!("pset({}, {})", term(v), term(w)),
            ITerm::Par(..) => format!("({})", print_iterm_plain(t)),
            ITerm::Store(r, v) => format!("({r} ⇐ {})", term(v)),
        }
    }
    let mut parts = Vec::new();
    chain(t, &mut parts);
    parts.into_iter().map(term).collect::<Vec<_>>().join(" | ")
}

impl fmt::Display for ITerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_iterm(self))
    }
}

/// Nameless rendering: equal exactly for alpha-equivalent terms.
pub fn ikey(t: &ITerm) -> String {
    fn walk<'a>(t: &'a ITerm, env: &mut Vec<&'a Name>, out: &mut String) {
        match t {
            ITerm::Unit => out.push('*'),
            ITerm::Var(x) => match env.iter().rev().position(|b| *b == x) {
                Some(i) => {
                    let _ = write!(out, "%{i}");
                }
                None => {
                    let _ = write!(out, "'{x}'");
                }
            },
            ITerm::Region(r) => {
                let _ = write!(out, "@{r}");
            }
            ITerm::Lam(x, a, b) => {
                let _ = write!(out, "(L{}.", a.as_ref().map(print_type).unwrap_or_default());
                env.push(x);
                walk(b, env, out);
                env.pop();
                out.push(')');
            }
            ITerm::App(a, b) | ITerm::Pset(a, b) | ITerm::Par(a, b) => {
                out.push_str(match t {
                    ITerm::App(..) => "(A ",
                    ITerm::Pset(..) => "(P ",
                    _ => "(| ",
                });
                walk(a, env, out);
                out.push(' ');
                walk(b, env, out);
                out.push(')');
            }
            ITerm::Get(a) => {
                out.push_str("(G ");
                walk(a, env, out);
                out.push(')');
            }
            ITerm::Store(r, a) => {
                let _ = write!(out, "(S @{r} ");
                walk(a, env, out);
                out.push(')');
            }
        }
    }
    let mut s = String::new();
    walk(t, &mut Vec::new(), &mut s);
    s
}

// ---- reduction ------------------------------------------------------------

/// A program as a multiset of threads and a multiset of (persistent) stores.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IProgram {
    pub threads: Vec<ITerm>,
    pub stores: Vec<(Region, ITerm)>,
}

impl IProgram {
    pub fn from_term(t: &ITerm) -> IProgram {
        let mut p = IProgram::default();
        p.absorb(t.clone());
        p
    }

    /// Appends the threads and stores of `t`.
    fn absorb(&mut self, t: ITerm) {
        let mut work = vec![t];
        while let Some(t) = work.pop() {
            match t {
                ITerm::Par(a, b) => {
                    work.push(*b);
                    work.push(*a);
                }
                ITerm::Store(r, v) => self.stores.push((r, *v)),
                t => self.threads.push(t),
            }
        }
    }

    pub fn to_term(&self) -> ITerm {
        let mut parts: Vec<ITerm> = self.threads.clone();
        parts.extend(self.stores.iter().map(|(r, v)| ITerm::Store(r.clone(), Box::new(v.clone()))));
        match parts.pop() {
            None => ITerm::Unit,
            Some(last) => parts.into_iter().rev().fold(last, |acc, p| ITerm::par(p, acc)),
        }
    }

    pub fn thread_keys(&self) -> Vec<String> {
        let mut k: Vec<String> = self.threads.iter().map(ikey).collect();
        k.sort();
        k
    }

    pub fn store_keys(&self) -> Vec<String> {
        let mut k: Vec<String> = self.stores.iter().map(|(r, v)| format!("{r}<={}", ikey(v))).collect();
        k.sort();
        k
    }

    /// Multiset equality of threads and stores.
    pub fn key(&self) -> (Vec<String>, Vec<String>) {
        (self.thread_keys(), self.store_keys())
    }
}

fn hole_path(t: &ITerm) -> Vec<usize> {
    let mut path = Vec::new();
    let mut cur = t;
    while let ITerm::App(f, a) = cur {
        if !f.is_value() {
            path.push(0);
            cur = f;
        } else if !a.is_value() {
            path.push(1);
            cur = a;
        } else {
            break;
        }
    }
    path
}

fn at_mut<'t>(t: &'t mut ITerm, path: &[usize]) -> &'t mut ITerm {
    let mut cur = t;
    for &i in path {
        cur = match (cur, i) {
            (ITerm::App(f, _), 0) => f,
            (ITerm::App(_, a), _) => a,
            _ => unreachable!("hole paths follow evaluation contexts"),
        };
    }
    cur
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IStepKind {
    Beta,
    Get,
    Pset,
}

/// Every one-step successor, with the thread and kind of the step.
pub fn i_step_all(p: &IProgram) -> Vec<(usize, IStepKind, IProgram)> {
    let mut out = Vec::new();
    for (i, t) in p.threads.iter().enumerate() {
        let path = hole_path(t);
        let mut probe = t.clone();
        let h = at_mut(&mut probe, &path).clone();
        let mut finish = |reduct: ITerm, store: Option<(Region, ITerm)>, kind: IStepKind| {
            let mut t2 = t.clone();
            *at_mut(&mut t2, &path) = reduct;
            let mut q = IProgram { threads: Vec::new(), stores: p.stores.clone() };
            let before: Vec<ITerm> = p.threads[..i].to_vec();
            let after: Vec<ITerm> = p.threads[i + 1..].to_vec();
            q.threads = before;
            q.absorb(t2);
            if let Some((r, v)) = store {
                q.stores.push((r, v));
            }
            q.threads.extend(after);
            out.push((i, kind, q));
        };
        match &h {
            ITerm::App(f, a) if a.is_value() => {
                if let ITerm::Lam(x, _, body) = &**f {
                    finish(isubst(body, x, a), None, IStepKind::Beta);
                }
            }
            ITerm::Get(v) => {
                if let ITerm::Region(r) = &**v {
                    for (s, w) in &p.stores {
                        if s == r {
                            finish(w.clone(), None, IStepKind::Get);
                        }
                    }
                }
            }
            ITerm::Pset(v, w) => {
                if let (ITerm::Region(r), true) = (&**v, w.is_value()) {
                    finish(ITerm::Unit, Some((r.clone(), (**w).clone())), IStepKind::Pset);
                }
            }
            _ => {}
        }
    }
    out
}
