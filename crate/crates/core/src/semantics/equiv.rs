//! Structural equivalence on canonical forms.
//!
//! Two canonical programs are equivalent when some bijection between their
//! top-level binders (respecting region and content) makes their thread
//! multisets and store multisets coincide up to renaming of bound names.

use std::collections::{BTreeMap, HashMap};

use super::{canonicalize, Canonical};
use crate::syntax::{nameless, print_type, Name, Term, Var};

/// Equal for equivalent programs; a cheap filter before [`canonical_equiv`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EquivKey(String);

fn store_term(c: &Canonical, i: usize) -> Term {
    let s = &c.stores[i];
    Term::Store(Var::new(s.address.clone()), s.kind, Box::new(s.value.clone()))
}

fn components(c: &Canonical) -> Vec<Term> {
    let mut out = c.threads.clone();
    out.extend((0..c.stores.len()).map(|i| store_term(c, i)));
    out
}

fn signature(c: &Canonical, i: usize) -> String {
    let b = &c.binders[i];
    format!("{}:{}", b.region, print_type(&b.content))
}

/// Per component: its shape (binders rendered as `$`) and, for each binder
/// occurrence, the binder index and the occurrence's position in the shape.
struct Analysis {
    shapes: Vec<String>,
    occurrences: Vec<Vec<usize>>,
    sigs: Vec<String>,
    /// binder -> sorted (shape, positions)
    profiles: Vec<Vec<(String, Vec<usize>)>>,
}

fn analyse(c: &Canonical) -> Analysis {
    let index: HashMap<&Name, usize> = c.binders.iter().enumerate().map(|(i, b)| (&b.name, i)).collect();
    let comps = components(c);
    let mut shapes = Vec::new();
    let mut occurrences = Vec::new();
    let mut per_binder: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); c.binders.len()];
    for (ci, t) in comps.iter().enumerate() {
        let mut occ = Vec::new();
        let mut pos = 0usize;
        let shape = nameless(t, &mut |n: &Name| {
            pos += 1;
            match index.get(n) {
                Some(&b) => {
                    occ.push(b);
                    per_binder[b].entry(ci).or_default().push(pos);
                    "$".to_string()
                }
                None => n.to_string(),
            }
        });
        shapes.push(shape);
        occurrences.push(occ);
    }
    let profiles = per_binder
        .into_iter()
        .map(|m| {
            let mut v: Vec<(String, Vec<usize>)> =
                m.into_iter().map(|(ci, ps)| (shapes[ci].clone(), ps)).collect();
            v.sort();
            v
        })
        .collect();
    let sigs = (0..c.binders.len()).map(|i| signature(c, i)).collect();
    Analysis { shapes, occurrences, sigs, profiles }
}

impl EquivKey {
    pub fn of(c: &Canonical) -> EquivKey {
        let a = analyse(c);
        let mut shapes = a.shapes;
        shapes.sort();
        let mut sigs = a.sigs;
        sigs.sort();
        EquivKey(format!("{}||{}", shapes.join("|"), sigs.join(",")))
    }
}

/// The components of `a` with binder occurrences numbered by `rename`.
fn numbered(a: &Analysis, rename: &[usize]) -> Vec<String> {
    let mut out: Vec<String> = a
        .shapes
        .iter()
        .zip(&a.occurrences)
        .map(|(s, occ)| {
            let mut names = occ.iter().map(|b| rename[*b]);
            let mut r = String::with_capacity(s.len() + 8);
            // `'$'` marks exactly the binder occurrences, in order
            let mut rest = s.as_str();
            while let Some(i) = rest.find("'$'") {
                r.push_str(&rest[..i]);
                r.push_str(&format!("'${}'", names.next().expect("one name per marker")));
                rest = &rest[i + 3..];
            }
            r.push_str(rest);
            r
        })
        .collect();
    out.sort();
    out
}

pub fn canonical_equiv(p: &Canonical, q: &Canonical) -> bool {
    if p.binders.len() != q.binders.len()
        || p.threads.len() != q.threads.len()
        || p.stores.len() != q.stores.len()
    {
        return false;
    }
    let (a, b) = (analyse(p), analyse(q));
    let mut sa = a.shapes.clone();
    let mut sb = b.shapes.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return false;
    }
    let identity: Vec<usize> = (0..q.binders.len()).collect();
    let target = numbered(&b, &identity);
    let candidates: Vec<Vec<usize>> = (0..p.binders.len())
        .map(|i| {
            (0..q.binders.len())
                .filter(|&j| a.sigs[i] == b.sigs[j] && a.profiles[i] == b.profiles[j])
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return false;
    }
    let mut chosen = vec![usize::MAX; p.binders.len()];
    let mut used = vec![false; q.binders.len()];
    search(0, &candidates, &mut chosen, &mut used, &|m| numbered(&a, m) == target)
}

fn search(
    i: usize,
    candidates: &[Vec<usize>],
    chosen: &mut Vec<usize>,
    used: &mut Vec<bool>,
    check: &dyn Fn(&[usize]) -> bool,
) -> bool {
    if i == candidates.len() {
        return check(chosen);
    }
    for &j in &candidates[i] {
        if used[j] {
            continue;
        }
        used[j] = true;
        chosen[i] = j;
        if search(i + 1, candidates, chosen, used, check) {
            return true;
        }
        used[j] = false;
    }
    false
}

/// `p ≡ q`.
pub fn equiv(p: &Term, q: &Term) -> bool {
    canonical_equiv(&canonicalize(p), &canonicalize(q))
}
