#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regioncalc::syntax::{parse_unit, AlphaKey, Name, Region, SourceUnit, StoreKind, Term, Type, Var};
use regioncalc::typecheck::CheckMode;

pub struct Entry {
    pub name: String,
    pub unit: SourceUnit,
    /// Modes listed on the `// accepts:` header line.
    pub accepts: Vec<CheckMode>,
}

impl Entry {
    pub fn accepted(&self, m: CheckMode) -> bool {
        self.accepts.contains(&m)
    }

    pub fn closed(&self) -> bool {
        self.unit.free.is_empty()
    }
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus() -> Vec<Entry> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "rgc"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let src = std::fs::read_to_string(&p).unwrap();
            let header = src.lines().next().unwrap_or_default();
            let accepts = header
                .strip_prefix("// accepts:")
                .unwrap_or_else(|| panic!("{} lacks an accepts header", p.display()))
                .split_whitespace()
                .map(|m| m.parse().unwrap())
                .collect();
            Entry {
                name: p.file_stem().unwrap().to_string_lossy().into_owned(),
                unit: parse_unit(&src).unwrap_or_else(|e| panic!("{}: {e}", p.display())),
                accepts,
            }
        })
        .collect()
}

pub fn entry(name: &str) -> Entry {
    corpus().into_iter().find(|e| e.name == name).unwrap_or_else(|| panic!("no corpus entry {name}"))
}

// ---- brute-force structural equivalence ----------------------------------
//
// Rewrites at program positions (under `|` and `ν`): commutativity and
// associativity of `|`, scope extrusion over `|`, scope extrusion out of an
// evaluation context, and swapping adjacent `ν`s; each in both directions.
// Terms are compared up to alpha.

fn b(t: Term) -> Box<Term> {
    Box::new(t)
}

fn names(t: &Term) -> BTreeSet<Name> {
    let mut s = BTreeSet::new();
    t.all_names(&mut s);
    s
}

fn fresh(t: &Term, base: &Name) -> Name {
    let taken = names(t);
    base.fresh(|n| taken.contains(n))
}

/// Renames free occurrences of `x`; `y` must be globally fresh.
fn ren(t: &Term, x: &Name, y: &Name) -> Term {
    let v = |w: &Var| if &w.name == x { Var { name: y.clone(), region: w.region.clone() } } else { w.clone() };
    match t {
        Term::Unit => Term::Unit,
        Term::Var(w) => Term::Var(v(w)),
        Term::Get(w) => Term::Get(v(w)),
        Term::Set(w, m) => Term::Set(v(w), b(ren(m, x, y))),
        Term::Pset(w, m) => Term::Pset(v(w), b(ren(m, x, y))),
        Term::Store(w, k, m) => Term::Store(v(w), *k, b(ren(m, x, y))),
        Term::Lam(z, a, m) if z == x => Term::Lam(z.clone(), a.clone(), m.clone()),
        Term::Lam(z, a, m) => Term::Lam(z.clone(), a.clone(), b(ren(m, x, y))),
        Term::Nu(z, r, a, m) if z == x => Term::Nu(z.clone(), r.clone(), a.clone(), m.clone()),
        Term::Nu(z, r, a, m) => Term::Nu(z.clone(), r.clone(), a.clone(), b(ren(m, x, y))),
        Term::LetBang(z, m, n) if z == x => Term::LetBang(z.clone(), b(ren(m, x, y)), n.clone()),
        Term::LetBang(z, m, n) => Term::LetBang(z.clone(), b(ren(m, x, y)), b(ren(n, x, y))),
        Term::App(f, a) => Term::App(b(ren(f, x, y)), b(ren(a, x, y))),
        Term::Par(p, q) => Term::Par(b(ren(p, x, y)), b(ren(q, x, y))),
        Term::Bang(m) => Term::Bang(b(ren(m, x, y))),
    }
}

/// Positions of evaluation-context holes strictly inside `t`.
fn spine_positions(t: &Term) -> Vec<Vec<usize>> {
    fn rec(t: &Term, here: &[usize], out: &mut Vec<Vec<usize>>) {
        let mut push = |i: usize, child: &Term| {
            let mut p = here.to_vec();
            p.push(i);
            out.push(p.clone());
            rec(child, &p, out);
        };
        match t {
            Term::App(f, a) => {
                push(0, f);
                if f.is_value() {
                    push(1, a);
                }
            }
            Term::Bang(m) | Term::LetBang(_, m, _) => push(0, m),
            _ => {}
        }
    }
    let mut out = Vec::new();
    rec(t, &[], &mut out);
    out
}

fn get(t: &Term, path: &[usize]) -> Term {
    let mut cur = t;
    for &i in path {
        cur = match (cur, i) {
            (Term::App(f, _), 0) => f,
            (Term::App(_, a), _) => a,
            (Term::Bang(m), _) | (Term::LetBang(_, m, _), _) => m,
            _ => unreachable!(),
        };
    }
    cur.clone()
}

fn put(t: &Term, path: &[usize], new: Term) -> Term {
    let Some((&i, rest)) = path.split_first() else { return new };
    match (t, i) {
        (Term::App(f, a), 0) => Term::App(b(put(f, rest, new)), a.clone()),
        (Term::App(f, a), _) => Term::App(f.clone(), b(put(a, rest, new))),
        (Term::Bang(m), _) => Term::Bang(b(put(m, rest, new))),
        (Term::LetBang(x, m, n), _) => Term::LetBang(x.clone(), b(put(m, rest, new)), n.clone()),
        _ => unreachable!(),
    }
}

fn is_thread(t: &Term) -> bool {
    !matches!(t, Term::Par(..) | Term::Nu(..) | Term::Store(..))
}

/// All one-step rewrites of `t`.
pub fn rewrites(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    match t {
        Term::Par(p, q) => {
            out.push(Term::Par(q.clone(), p.clone()));
            if let Term::Par(a, c) = &**p {
                out.push(Term::Par(a.clone(), b(Term::Par(c.clone(), q.clone()))));
            }
            if let Term::Par(c, d) = &**q {
                out.push(Term::Par(b(Term::Par(p.clone(), c.clone())), d.clone()));
            }
            if let Term::Nu(x, r, a, m) = &**p {
                let y = fresh(t, x);
                out.push(Term::Nu(y.clone(), r.clone(), a.clone(), b(Term::Par(b(ren(m, x, &y)), q.clone()))));
            }
            for p2 in rewrites(p) {
                out.push(Term::Par(b(p2), q.clone()));
            }
            for q2 in rewrites(q) {
                out.push(Term::Par(p.clone(), b(q2)));
            }
        }
        Term::Nu(x, r, a, m) => {
            if let Term::Par(p, q) = &**m {
                if !q.free_vars().contains(x) {
                    out.push(Term::Par(b(Term::Nu(x.clone(), r.clone(), a.clone(), p.clone())), q.clone()));
                }
            }
            if let Term::Nu(y, s, c, n) = &**m {
                if x != y {
                    out.push(Term::Nu(y.clone(), s.clone(), c.clone(), b(Term::Nu(x.clone(), r.clone(), a.clone(), n.clone()))));
                }
            }
            // push the binder into an evaluation context of a thread body
            if is_thread(m) {
                for path in spine_positions(m) {
                    let inner = get(m, &path);
                    let outside = put(m, &path, Term::Unit);
                    if !outside.free_vars().contains(x) {
                        out.push(put(m, &path, Term::Nu(x.clone(), r.clone(), a.clone(), b(inner))));
                    }
                }
            }
            for m2 in rewrites(m) {
                out.push(Term::Nu(x.clone(), r.clone(), a.clone(), b(m2)));
            }
        }
        t if is_thread(t) => {
            for path in spine_positions(t) {
                if let Term::Nu(x, r, a, m) = get(t, &path) {
                    let y = fresh(t, &x);
                    out.push(Term::Nu(y.clone(), r, a, b(put(t, &path, ren(&m, &x, &y)))));
                }
            }
        }
        _ => {}
    }
    out
}

/// Alpha-classes reachable from `t` in at most `depth` rewrites.
pub fn closure(t: &Term, depth: usize, cap: usize) -> HashSet<AlphaKey> {
    let mut seen = HashSet::from([AlphaKey::of(t)]);
    let mut frontier = vec![t.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in &frontier {
            for r in rewrites(s) {
                if seen.len() >= cap {
                    return seen;
                }
                if seen.insert(AlphaKey::of(&r)) {
                    next.push(r);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Brute-force `p ≡ q` within `depth` rewrites from each side.
pub fn brute_equiv(p: &Term, q: &Term, depth: usize) -> bool {
    let cp = closure(p, depth, 200_000);
    if cp.contains(&AlphaKey::of(q)) {
        return true;
    }
    let cq = closure(q, depth, 200_000);
    !cp.is_disjoint(&cq)
}

// ---- small random programs -----------------------------------------------

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn binder(&mut self) -> (Name, Region) {
        let x = ["x", "y"][self.rng.gen_range(0..2)];
        let r = ["r", "s"][self.rng.gen_range(0..2)];
        (Name::new(x), Region::new(r))
    }

    fn address(&mut self, bound: &[Name]) -> Var {
        let pool: Vec<Name> = bound.iter().cloned().chain([Name::new("a"), Name::new("b")]).collect();
        Var::new(pool[self.rng.gen_range(0..pool.len())].clone())
    }

    fn id(&self) -> Term {
        Term::Lam(Name::new("z"), Type::One, b(Term::Var(Var::new("z"))))
    }

    pub fn thread(&mut self, budget: usize, bound: &mut Vec<Name>) -> Term {
        let choice = if budget < 4 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..5) };
        match choice {
            0 => Term::Unit,
            1 => Term::Get(self.address(bound)),
            2 => Term::App(b(self.id()), b(self.thread(budget - 3, bound))),
            3 => {
                let (x, r) = self.binder();
                bound.push(x.clone());
                let body = self.thread(budget - 1, bound);
                bound.pop();
                Term::Nu(x, r, Type::One, b(body))
            }
            _ => {
                let (x, r) = self.binder();
                Term::App(b(Term::Nu(x, r, Type::One, b(self.id()))), b(self.thread(budget - 4, bound)))
            }
        }
    }

    pub fn program(&mut self, budget: usize, bound: &mut Vec<Name>) -> Term {
        let choice = if budget < 3 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..5) };
        match choice {
            0 => self.thread(budget, bound),
            1 => Term::Store(self.address(bound), StoreKind::Volatile, b(Term::Unit)),
            2 | 3 => {
                let left = self.rng.gen_range(1..budget - 1);
                let p = self.program(left, bound);
                let q = self.program(budget - 1 - left, bound);
                Term::Par(b(p), b(q))
            }
            _ => {
                let (x, r) = self.binder();
                bound.push(x.clone());
                let body = self.program(budget - 1, bound);
                bound.pop();
                Term::Nu(x, r, Type::One, b(body))
            }
        }
    }

    /// A program of at most `max` nodes.
    pub fn small(&mut self, max: usize) -> Term {
        loop {
            let t = self.program(max, &mut Vec::new());
            if t.size() <= max {
                return t;
            }
        }
    }

    /// `t` after a few random rewrites.
    pub fn scramble(&mut self, t: &Term, steps: usize) -> Term {
        let mut cur = t.clone();
        for _ in 0..steps {
            let rs = rewrites(&cur);
            if rs.is_empty() {
                break;
            }
            cur = rs[self.rng.gen_range(0..rs.len())].clone();
        }
        cur
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }
}
