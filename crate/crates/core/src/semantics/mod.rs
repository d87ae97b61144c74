//! Reduction of programs up to structural equivalence.
//!
//! A program is kept in canonical form: every ν that can be pulled to the
//! top (out of a parallel composition or an evaluation context) has been,
//! parallel compositions are flattened into a list of threads, and stores are
//! kept apart from threads. Each thread has at most one redex, so the only
//! nondeterminism is the choice of thread and, for `get`, of store binding.

mod equiv;
mod subst;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

pub use equiv::{canonical_equiv, equiv, EquivKey};
pub use subst::{rename, subst, SubstError};

use crate::syntax::{print_term, Name, Region, StoreKind, Term, Type, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binder {
    pub name: Name,
    pub region: Region,
    pub content: Type,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoreBinding {
    pub address: Name,
    pub kind: StoreKind,
    pub value: Term,
    /// Insertion order, used only to schedule deterministically.
    pub seq: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Canonical {
    pub binders: Vec<Binder>,
    pub threads: Vec<Term>,
    pub stores: Vec<StoreBinding>,
    pub next_seq: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RedexKind {
    Beta,
    LetBang,
    SetV,
    PsetV,
    GetVolatile,
    GetPersistent,
}

impl fmt::Display for RedexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Redex {
    pub thread: usize,
    pub kind: RedexKind,
    /// Index into `stores` of the binding a `get` reads.
    pub store: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("persistent get on `{address}` found `{value}`, which is not a banged value")]
    MalformedStore { address: Name, value: Box<Term> },
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error("redex {0:?} does not apply to this program")]
    NotARedex(Redex),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ThreadClass {
    Value,
    BlockedGet(Name),
    Anomaly,
}

impl Canonical {
    /// Every name the program mentions, bound or free.
    fn names(&self) -> BTreeSet<Name> {
        let mut out: BTreeSet<Name> = self.binders.iter().map(|b| b.name.clone()).collect();
        for t in &self.threads {
            t.all_names(&mut out);
        }
        for s in &self.stores {
            out.insert(s.address.clone());
            s.value.all_names(&mut out);
        }
        out
    }

    /// Names a newly extruded binder must avoid: existing binders and
    /// everything free in the rest of the program.
    fn occupied(&self) -> BTreeSet<Name> {
        let mut out: BTreeSet<Name> = self.binders.iter().map(|b| b.name.clone()).collect();
        for t in &self.threads {
            out.extend(t.free_vars());
        }
        for s in &self.stores {
            out.insert(s.address.clone());
            out.extend(s.value.free_vars());
        }
        out
    }

    /// Splits `t` into threads, stores and extruded binders. Threads are
    /// returned rather than pushed so that callers can place them.
    fn absorb(&mut self, t: Term, pending: &[Term]) -> Vec<Term> {
        let mut threads = Vec::new();
        let mut work = vec![t];
        while let Some(mut t) = work.pop() {
            match t {
                Term::Par(a, b) => {
                    work.push(*b);
                    work.push(*a);
                }
                Term::Store(x, kind, v) => {
                    self.stores.push(StoreBinding { address: x.name, kind, value: *v, seq: self.next_seq });
                    self.next_seq += 1;
                }
                _ => {
                    let path = hole_path(&t);
                    let hole = at_mut(&mut t, &path);
                    if let Term::Nu(..) = hole {
                        let Term::Nu(x, r, a, body) = std::mem::replace(hole, Term::Unit) else {
                            unreachable!()
                        };
                        let mut busy = self.occupied();
                        for o in threads.iter().chain(work.iter()).chain(pending.iter()) {
                            busy.extend(o.free_vars());
                        }
                        // the rest of this thread, outside the ν
                        busy.extend(t.free_vars());
                        let (name, body) = if busy.contains(&x) {
                            let mut taken = self.names();
                            taken.extend(busy);
                            t.all_names(&mut taken);
                            body.all_names(&mut taken);
                            let y = x.fresh(|n| taken.contains(n));
                            let body = rename(&body, &x, &y);
                            (y, body)
                        } else {
                            (x, *body)
                        };
                        self.binders.push(Binder { name, region: r, content: a });
                        *at_mut(&mut t, &path) = body;
                        work.push(t);
                    } else {
                        threads.push(t);
                    }
                }
            }
        }
        threads
    }

    /// The program as a single term: `ν…ν (T1 | … | Tn | S1 | … | Sm)`.
    pub fn to_term(&self) -> Term {
        let mut parts: Vec<Term> = self.threads.clone();
        parts.extend(self.stores.iter().map(|s| {
            Term::Store(Var::new(s.address.clone()), s.kind, Box::new(s.value.clone()))
        }));
        let mut body = match parts.pop() {
            None => Term::Unit,
            Some(last) => parts.into_iter().rev().fold(last, |acc, p| Term::par(p, acc)),
        };
        for b in self.binders.iter().rev() {
            body = Term::Nu(b.name.clone(), b.region.clone(), b.content.clone(), Box::new(body));
        }
        body
    }

    pub fn print(&self) -> String {
        print_term(&self.to_term())
    }

    pub fn is_normal(&self) -> bool {
        find_redexes(self).is_empty()
    }
}

pub fn canonicalize(t: &Term) -> Canonical {
    let mut c = Canonical::default();
    let threads = c.absorb(t.clone(), &[]);
    c.threads = threads;
    c
}

/// Re-canonicalizes an already canonical program read back from its term.
pub fn recanonicalize(c: &Canonical) -> Canonical {
    canonicalize(&c.to_term())
}

/// The subterm in evaluation position: descend `E M`, `V E`, `!E` and
/// `let !x = E in M` while the position is not yet a value.
fn hole_path(t: &Term) -> Vec<usize> {
    let mut path = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::App(f, a) => {
                if !f.is_value() {
                    path.push(0);
                    cur = f;
                } else if !a.is_value() {
                    path.push(1);
                    cur = a;
                } else {
                    return path;
                }
            }
            Term::Bang(m) if !m.is_value() => {
                path.push(0);
                cur = m;
            }
            Term::LetBang(_, m, _) if !m.is_value() => {
                path.push(0);
                cur = m;
            }
            _ => return path,
        }
    }
}

fn hole_mut(t: &mut Term) -> &mut Term {
    let path = hole_path(t);
    at_mut(t, &path)
}

fn at_mut<'t>(t: &'t mut Term, path: &[usize]) -> &'t mut Term {
    let mut cur = t;
    for &i in path {
        cur = match (cur, i) {
            (Term::App(f, _), 0) => f,
            (Term::App(_, a), 1) => a,
            (Term::Bang(m), _) => m,
            (Term::LetBang(_, m, _), _) => m,
            _ => unreachable!("hole paths follow evaluation contexts"),
        };
    }
    cur
}

pub fn hole(t: &Term) -> &Term {
    let mut cur = t;
    for i in hole_path(t) {
        cur = cur.children()[i];
    }
    cur
}

/// Redexes of `c`, by thread and then by store insertion order.
pub fn find_redexes(c: &Canonical) -> Vec<Redex> {
    let mut out = Vec::new();
    for (i, t) in c.threads.iter().enumerate() {
        let h = hole(t);
        let kind = match h {
            Term::App(f, a) if a.is_value() && matches!(**f, Term::Lam(..)) => Some(RedexKind::Beta),
            Term::LetBang(_, m, _) if matches!(**m, Term::Bang(_)) => Some(RedexKind::LetBang),
            Term::Set(..) => Some(RedexKind::SetV),
            Term::Pset(..) => Some(RedexKind::PsetV),
            Term::Get(x) => {
                for (j, s) in c.stores.iter().enumerate() {
                    if s.address == x.name {
                        let kind = match s.kind {
                            StoreKind::Volatile => RedexKind::GetVolatile,
                            StoreKind::Persistent => RedexKind::GetPersistent,
                        };
                        out.push(Redex { thread: i, kind, store: Some(j) });
                    }
                }
                None
            }
            _ => None,
        };
        if let Some(kind) = kind {
            out.push(Redex { thread: i, kind, store: None });
        }
    }
    out
}

/// Performs one reduction step; the result is canonical again.
pub fn apply(c: &Canonical, r: Redex) -> Result<Canonical, SemanticsError> {
    let mut next = c.clone();
    let Some(mut t) = next.threads.get(r.thread).cloned() else {
        return Err(SemanticsError::NotARedex(r));
    };
    let h = hole_mut(&mut t);
    let new_store;
    let reduct = match (r.kind, &*h) {
        (RedexKind::Beta, Term::App(f, v)) => match &**f {
            Term::Lam(x, _, body) => {
                new_store = None;
                subst(body, x, v)?
            }
            _ => return Err(SemanticsError::NotARedex(r)),
        },
        (RedexKind::LetBang, Term::LetBang(x, m, body)) => match &**m {
            Term::Bang(v) => {
                new_store = None;
                subst(body, x, v)?
            }
            _ => return Err(SemanticsError::NotARedex(r)),
        },
        (RedexKind::SetV, Term::Set(x, v)) => {
            new_store = Some(Term::Store(x.clone(), StoreKind::Volatile, v.clone()));
            Term::Unit
        }
        (RedexKind::PsetV, Term::Pset(x, v)) => {
            new_store = Some(Term::Store(x.clone(), StoreKind::Persistent, v.clone()));
            Term::Unit
        }
        (RedexKind::GetVolatile | RedexKind::GetPersistent, Term::Get(x)) => {
            let j = r.store.ok_or(SemanticsError::NotARedex(r))?;
            let s = next.stores.get(j).ok_or(SemanticsError::NotARedex(r))?;
            if s.address != x.name {
                return Err(SemanticsError::NotARedex(r));
            }
            new_store = None;
            match (r.kind, s.kind) {
                (RedexKind::GetVolatile, StoreKind::Volatile) => next.stores.remove(j).value,
                (RedexKind::GetPersistent, StoreKind::Persistent) => match &s.value {
                    Term::Bang(_) => s.value.clone(),
                    other => {
                        return Err(SemanticsError::MalformedStore {
                            address: s.address.clone(),
                            value: Box::new(other.clone()),
                        })
                    }
                },
                _ => return Err(SemanticsError::NotARedex(r)),
            }
        }
        _ => return Err(SemanticsError::NotARedex(r)),
    };
    *h = reduct;
    next.threads.remove(r.thread);
    let pending: Vec<Term> = next.threads.clone();
    let mut placed = next.absorb(t, &pending);
    if let Some(s) = new_store {
        placed.extend(next.absorb(s, &pending));
    }
    let tail = next.threads.split_off(r.thread);
    next.threads.extend(placed);
    next.threads.extend(tail);
    Ok(next)
}

pub fn classify_stuck(c: &Canonical) -> Vec<ThreadClass> {
    c.threads
        .iter()
        .map(|t| {
            if t.is_value() {
                return ThreadClass::Value;
            }
            match hole(t) {
                Term::Get(x) if !c.stores.iter().any(|s| s.address == x.name) => {
                    ThreadClass::BlockedGet(x.name.clone())
                }
                _ => ThreadClass::Anomaly,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Terminated,
    BudgetExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub rule: RedexKind,
    pub thread: usize,
    #[serde(rename = "redex-kind")]
    pub redex_kind: &'static str,
    #[serde(rename = "program-printout")]
    pub program: String,
}

pub fn redex_class(k: RedexKind) -> &'static str {
    match k {
        RedexKind::Beta | RedexKind::LetBang => "functional",
        _ => "side-effect",
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub last: Canonical,
    pub steps: usize,
    pub status: RunStatus,
}

/// Runs with a scheduler that picks among the current redexes; `on_step`
/// sees every step taken.
pub fn run_with(
    c: &Canonical,
    budget: usize,
    mut choose: impl FnMut(&[Redex]) -> usize,
    mut on_step: impl FnMut(&TraceStep),
) -> Result<RunOutcome, SemanticsError> {
    let mut cur = c.clone();
    for step in 0..budget {
        let rs = find_redexes(&cur);
        if rs.is_empty() {
            return Ok(RunOutcome { last: cur, steps: step, status: RunStatus::Terminated });
        }
        let r = rs[choose(&rs).min(rs.len() - 1)];
        cur = apply(&cur, r)?;
        on_step(&TraceStep {
            step: step + 1,
            rule: r.kind,
            thread: r.thread,
            redex_kind: redex_class(r.kind),
            program: cur.print(),
        });
    }
    let status = if cur.is_normal() { RunStatus::Terminated } else { RunStatus::BudgetExceeded };
    Ok(RunOutcome { last: cur, steps: budget, status })
}

/// Deterministic run: always the first redex (lowest thread, oldest store).
pub fn run_det(c: &Canonical, budget: usize) -> Result<RunOutcome, SemanticsError> {
    run_with(c, budget, |_| 0, |_| {})
}
