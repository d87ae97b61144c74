//! Abstract syntax for programs, types and source units.
//!
//! Terms and programs share one tree: a program is a term that may also
//! contain stores, provided every store sits under a spine of `|` and `nu`
//! nodes starting at the root. The parser enforces that, together with the
//! value restriction on `set`/`pset`/store payloads.

mod alpha;
mod parser;
mod print;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use alpha::{alpha_equiv, nameless, AlphaKey};
pub use parser::{parse_program, parse_type, parse_unit, ParseError, ParseErrorKind};
pub use print::{print_term, print_type, print_unit};

use crate::usage::{Usage, UsageFamily};

/// A variable or address name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(String);

impl Name {
    pub fn new(s: impl Into<String>) -> Self {
        Name(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name with any generated `#n` suffix removed.
    pub fn base(&self) -> &str {
        match self.0.rfind('#') {
            Some(i)
                if i > 0
                    && i + 1 < self.0.len()
                    && self.0[i + 1..].bytes().all(|b| b.is_ascii_digit()) =>
            {
                &self.0[..i]
            }
            _ => &self.0,
        }
    }

    /// Smallest `base#n` (n >= 1) rejected by `taken`.
    pub fn fresh(&self, taken: impl Fn(&Name) -> bool) -> Name {
        let base = self.base();
        (1..)
            .map(|n| Name(format!("{base}#{n}")))
            .find(|cand| !taken(cand))
            .expect("unbounded supply")
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name(s.to_owned())
    }
}

/// A region name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Region(String);

impl Region {
    pub fn new(s: impl Into<String>) -> Self {
        Region(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for Region {
    fn from(s: &str) -> Self {
        Region(s.to_owned())
    }
}

/// A finite set of regions a computation may read or write.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Effect(BTreeSet<Region>);

impl Effect {
    pub fn empty() -> Self {
        Effect(BTreeSet::new())
    }

    pub fn single(r: Region) -> Self {
        Effect(BTreeSet::from([r]))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, r: &Region) -> bool {
        self.0.contains(r)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Region> {
        self.0.iter()
    }

    pub fn union(&self, other: &Effect) -> Effect {
        Effect(self.0.union(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &Effect) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn insert(&mut self, r: Region) {
        self.0.insert(r);
    }
}

impl FromIterator<Region> for Effect {
    fn from_iter<I: IntoIterator<Item = Region>>(iter: I) -> Self {
        Effect(iter.into_iter().collect())
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}

/// Types: the behaviour type `B` and the value types.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Type {
    One,
    Behaviour,
    /// Affine arrow carrying its latent effect; `-o` is the empty-effect arrow.
    Arrow(Box<Type>, Effect, Box<Type>),
    Bang(Box<Type>),
    Reg(Region, Box<Type>),
}

impl Type {
    pub fn arrow(dom: Type, eff: Effect, cod: Type) -> Type {
        Type::Arrow(Box::new(dom), eff, Box::new(cod))
    }

    pub fn lolli(dom: Type, cod: Type) -> Type {
        Type::arrow(dom, Effect::empty(), cod)
    }

    pub fn bang(t: Type) -> Type {
        Type::Bang(Box::new(t))
    }

    pub fn reg(r: impl Into<Region>, t: Type) -> Type {
        Type::Reg(r.into(), Box::new(t))
    }

    /// Every region name mentioned, in region positions and in latent effects.
    pub fn regions(&self, out: &mut BTreeSet<Region>) {
        match self {
            Type::One | Type::Behaviour => {}
            Type::Arrow(a, e, b) => {
                a.regions(out);
                out.extend(e.iter().cloned());
                b.regions(out);
            }
            Type::Bang(a) => a.regions(out),
            Type::Reg(r, a) => {
                out.insert(r.clone());
                a.regions(out);
            }
        }
    }

    /// True when no arrow inside carries a non-empty effect.
    pub fn is_effect_free(&self) -> bool {
        match self {
            Type::One | Type::Behaviour => true,
            Type::Arrow(a, e, b) => e.is_empty() && a.is_effect_free() && b.is_effect_free(),
            Type::Bang(a) | Type::Reg(_, a) => a.is_effect_free(),
        }
    }

    /// Same type with every latent effect erased.
    pub fn erase_effects(&self) -> Type {
        match self {
            Type::One => Type::One,
            Type::Behaviour => Type::Behaviour,
            Type::Arrow(a, _, b) => Type::lolli(a.erase_effects(), b.erase_effects()),
            Type::Bang(a) => Type::bang(a.erase_effects()),
            Type::Reg(r, a) => Type::Reg(r.clone(), Box::new(a.erase_effects())),
        }
    }

    /// `B` appears only as the codomain of an arrow (or as the whole type).
    pub fn behaviour_well_placed(&self, value_position: bool) -> bool {
        match self {
            Type::One => true,
            Type::Behaviour => !value_position,
            Type::Arrow(a, _, b) => a.behaviour_well_placed(true) && b.behaviour_well_placed(false),
            Type::Bang(a) | Type::Reg(_, a) => a.behaviour_well_placed(true),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_type(self))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreKind {
    Volatile,
    Persistent,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Volatile,
    Persistent,
}

impl RegionKind {
    pub fn store_kind(self) -> StoreKind {
        match self {
            RegionKind::Volatile => StoreKind::Volatile,
            RegionKind::Persistent => StoreKind::Persistent,
        }
    }
}

/// A variable occurrence, optionally decorated with the region of its type.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    pub name: Name,
    pub region: Option<Region>,
}

impl Var {
    pub fn new(name: impl Into<Name>) -> Self {
        Var { name: name.into(), region: None }
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

impl From<Name> for Var {
    fn from(name: Name) -> Self {
        Var { name, region: None }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Unit,
    Var(Var),
    Lam(Name, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Bang(Box<Term>),
    LetBang(Name, Box<Term>, Box<Term>),
    /// `nu x@r:A. P` binds an address `x : Reg_r A`.
    Nu(Name, Region, Type, Box<Term>),
    Get(Var),
    Set(Var, Box<Term>),
    Pset(Var, Box<Term>),
    Par(Box<Term>, Box<Term>),
    Store(Var, StoreKind, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn lam(x: &str, ty: Type, body: Term) -> Term {
        Term::Lam(x.into(), ty, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn bang(t: Term) -> Term {
        Term::Bang(Box::new(t))
    }

    pub fn let_bang(x: &str, m: Term, n: Term) -> Term {
        Term::LetBang(x.into(), Box::new(m), Box::new(n))
    }

    pub fn nu(x: &str, r: &str, ty: Type, body: Term) -> Term {
        Term::Nu(x.into(), r.into(), ty, Box::new(body))
    }

    pub fn get(x: &str) -> Term {
        Term::Get(Var::new(x))
    }

    pub fn set(x: &str, v: Term) -> Term {
        Term::Set(Var::new(x), Box::new(v))
    }

    pub fn pset(x: &str, v: Term) -> Term {
        Term::Pset(Var::new(x), Box::new(v))
    }

    pub fn par(a: Term, b: Term) -> Term {
        Term::Par(Box::new(a), Box::new(b))
    }

    pub fn store(x: &str, kind: StoreKind, v: Term) -> Term {
        Term::Store(Var::new(x), kind, Box::new(v))
    }

    pub fn is_value(&self) -> bool {
        match self {
            Term::Unit | Term::Var(_) | Term::Lam(..) => true,
            Term::Bang(v) => v.is_value(),
            _ => false,
        }
    }

    /// Stores and parallel compositions of stores.
    pub fn is_store(&self) -> bool {
        match self {
            Term::Store(..) => true,
            Term::Par(a, b) => a.is_store() && b.is_store(),
            _ => false,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Direct subterms, in source order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Unit | Term::Var(_) | Term::Get(_) => vec![],
            Term::Lam(_, _, b) | Term::Bang(b) | Term::Nu(_, _, _, b) => vec![b],
            Term::Set(_, v) | Term::Pset(_, v) | Term::Store(_, _, v) => vec![v],
            Term::App(a, b) | Term::LetBang(_, a, b) | Term::Par(a, b) => vec![a, b],
        }
    }

    /// Free variable names, including addresses used by get/set/pset/stores.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a Name>, out: &mut BTreeSet<Name>) {
        let mut note = |v: &Var, bound: &Vec<&Name>| {
            if !bound.contains(&&v.name) {
                out.insert(v.name.clone());
            }
        };
        match self {
            Term::Unit => {}
            Term::Var(v) | Term::Get(v) => note(v, bound),
            Term::Set(v, t) | Term::Pset(v, t) | Term::Store(v, _, t) => {
                note(v, bound);
                t.collect_free(bound, out);
            }
            Term::Lam(x, _, b) | Term::Nu(x, _, _, b) => {
                bound.push(x);
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::LetBang(x, m, n) => {
                m.collect_free(bound, out);
                bound.push(x);
                n.collect_free(bound, out);
                bound.pop();
            }
            Term::App(a, b) | Term::Par(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Bang(b) => b.collect_free(bound, out),
        }
    }

    /// Every name occurring anywhere (binders, bound and free occurrences).
    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Unit => {}
            Term::Var(v) | Term::Get(v) => {
                out.insert(v.name.clone());
            }
            Term::Set(v, t) | Term::Pset(v, t) | Term::Store(v, _, t) => {
                out.insert(v.name.clone());
                t.all_names(out);
            }
            Term::Lam(x, _, b) | Term::Nu(x, _, _, b) => {
                out.insert(x.clone());
                b.all_names(out);
            }
            Term::LetBang(x, m, n) => {
                out.insert(x.clone());
                m.all_names(out);
                n.all_names(out);
            }
            Term::App(a, b) | Term::Par(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Term::Bang(b) => b.all_names(out),
        }
    }

    /// Removes every region decoration.
    pub fn undecorate(&self) -> Term {
        let strip = |v: &Var| Var::new(v.name.clone());
        match self {
            Term::Unit => Term::Unit,
            Term::Var(v) => Term::Var(strip(v)),
            Term::Get(v) => Term::Get(strip(v)),
            Term::Set(v, t) => Term::Set(strip(v), Box::new(t.undecorate())),
            Term::Pset(v, t) => Term::Pset(strip(v), Box::new(t.undecorate())),
            Term::Store(v, k, t) => Term::Store(strip(v), *k, Box::new(t.undecorate())),
            Term::Lam(x, a, b) => Term::Lam(x.clone(), a.clone(), Box::new(b.undecorate())),
            Term::Nu(x, r, a, b) => {
                Term::Nu(x.clone(), r.clone(), a.clone(), Box::new(b.undecorate()))
            }
            Term::LetBang(x, m, n) => {
                Term::LetBang(x.clone(), Box::new(m.undecorate()), Box::new(n.undecorate()))
            }
            Term::App(a, b) => Term::app(a.undecorate(), b.undecorate()),
            Term::Par(a, b) => Term::par(a.undecorate(), b.undecorate()),
            Term::Bang(b) => Term::bang(b.undecorate()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RegionDecl {
    pub name: Region,
    pub kind: RegionKind,
    pub family: UsageFamily,
    pub content: Type,
}

/// A free variable of the main program, declared `aff` (usage 1) or `exp` (usage ∞).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FreeDecl {
    pub name: Name,
    pub usage: Usage,
    pub ty: Type,
}

/// Line/column of a node in the source text, both 1-based.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug)]
pub struct SourceUnit {
    pub regions: Vec<RegionDecl>,
    pub free: Vec<FreeDecl>,
    pub main: Term,
    /// Source position of every node of `main`, in pre-order.
    pub spans: Vec<Span>,
}

impl SourceUnit {
    /// A unit without source positions, e.g. a reduct assembled by the evaluator.
    pub fn with_main(&self, main: Term) -> SourceUnit {
        SourceUnit {
            regions: self.regions.clone(),
            free: self.free.clone(),
            main,
            spans: Vec::new(),
        }
    }

    pub fn region(&self, r: &Region) -> Option<&RegionDecl> {
        self.regions.iter().find(|d| &d.name == r)
    }

    /// Closed in the sense of the progress property: every free variable is an address.
    pub fn is_closed(&self) -> bool {
        self.free.iter().all(|d| matches!(d.ty, Type::Reg(..)))
    }
}
