//! Exhaustive exploration of reduction graphs and the properties checked on
//! them: one-step diamonds, unique normal forms, type preservation,
//! termination and progress.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::semantics::{
    apply, canonical_equiv, canonicalize, classify_stuck, find_redexes, Canonical, EquivKey, Redex,
    RedexKind, ThreadClass,
};
use crate::syntax::SourceUnit;
use crate::typecheck::{check_against, CheckMode, Judgement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Longest path explored from the initial state.
    pub depth: usize,
    /// Most states kept.
    pub width: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { depth: 10_000, width: 100_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiamondViolation {
    pub state: String,
    pub first: RedexKind,
    pub first_thread: usize,
    pub second: RedexKind,
    pub second_thread: usize,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: RedexKind,
    pub thread: usize,
}

#[derive(Clone, Debug)]
pub struct ExplorationReport {
    pub states: Vec<Canonical>,
    pub edges: Vec<Edge>,
    /// Deepest BFS level reached.
    pub max_depth: usize,
    /// Indices of states without redexes.
    pub normal_forms: Vec<usize>,
    pub violations: Vec<DiamondViolation>,
    /// Some path revisits a state or was cut by the depth bound.
    pub divergent: bool,
    pub has_cycle: bool,
    /// The width or depth bound stopped the exploration early.
    pub truncated: bool,
    /// Longest path to a normal form when the graph is finite and acyclic.
    pub longest_path: Option<usize>,
    /// Steps that raised a runtime error (untyped inputs only).
    pub errors: Vec<String>,
}

impl ExplorationReport {
    pub fn terminates(&self) -> bool {
        !self.divergent && !self.truncated && self.errors.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "states": self.states.len(),
            "edges": self.edges.len(),
            "max_depth": self.max_depth,
            "normal_forms": self.normal_forms.iter().map(|&i| self.states[i].print()).collect::<Vec<_>>(),
            "diamond_violations": self.violations,
            "divergent": self.divergent,
            "truncated": self.truncated,
            "longest_path": self.longest_path,
            "errors": self.errors,
        })
    }
}

type Successors = Vec<(Redex, Result<Canonical, String>)>;

fn successors(c: &Canonical) -> Successors {
    find_redexes(c)
        .into_iter()
        .map(|r| (r, apply(c, r).map_err(|e| e.to_string())))
        .collect()
}

/// Prop. 2(b) at one state: every two different steps are equivalent or
/// meet again after one more step each.
fn diamond_at(c: &Canonical, succ: &Successors) -> Vec<DiamondViolation> {
    let mut out = Vec::new();
    let ok: Vec<(Redex, &Canonical)> =
        succ.iter().filter_map(|(r, s)| s.as_ref().ok().map(|s| (*r, s))).collect();
    let mut next: Vec<Option<Vec<Canonical>>> = vec![None; ok.len()];
    let more = |i: usize, next: &mut Vec<Option<Vec<Canonical>>>| -> Vec<Canonical> {
        next[i]
            .get_or_insert_with(|| {
                successors(ok[i].1).into_iter().filter_map(|(_, s)| s.ok()).collect()
            })
            .clone()
    };
    for i in 0..ok.len() {
        for j in i + 1..ok.len() {
            let (a, b) = (ok[i].1, ok[j].1);
            if canonical_equiv(a, b) {
                continue;
            }
            let na = more(i, &mut next);
            let nb = more(j, &mut next);
            let keys: Vec<EquivKey> = nb.iter().map(EquivKey::of).collect();
            let joined = na.iter().any(|x| {
                let kx = EquivKey::of(x);
                nb.iter().zip(&keys).any(|(y, ky)| *ky == kx && canonical_equiv(x, y))
            });
            if !joined {
                out.push(DiamondViolation {
                    state: c.print(),
                    first: ok[i].0.kind,
                    first_thread: ok[i].0.thread,
                    second: ok[j].0.kind,
                    second_thread: ok[j].0.thread,
                    left: a.print(),
                    right: b.print(),
                });
            }
        }
    }
    out
}

/// Breadth-first exploration of every interleaving, merging equivalent
/// states. With `diamond`, every branching state is also checked for the
/// one-step diamond.
pub fn explore(start: &Canonical, bounds: Bounds, diamond: bool) -> ExplorationReport {
    let mut states: Vec<Canonical> = vec![start.clone()];
    let mut buckets: HashMap<EquivKey, Vec<usize>> = HashMap::new();
    buckets.entry(EquivKey::of(start)).or_default().push(0);
    let mut edges = Vec::new();
    let mut normal_forms = Vec::new();
    let mut violations = Vec::new();
    let mut errors = Vec::new();
    let mut truncated = false;
    let mut depth_cut = false;
    let mut frontier = vec![0usize];
    let mut depth = 0;
    let mut max_depth = 0;

    while !frontier.is_empty() {
        max_depth = depth;
        let expanded: Vec<(Successors, Vec<DiamondViolation>)> = frontier
            .par_iter()
            .map(|&i| {
                let succ = successors(&states[i]);
                let v = if diamond && succ.len() > 1 { diamond_at(&states[i], &succ) } else { Vec::new() };
                (succ, v)
            })
            .collect();
        let mut next = Vec::new();
        for (&from, (succ, v)) in frontier.iter().zip(expanded) {
            violations.extend(v);
            if succ.is_empty() {
                normal_forms.push(from);
                continue;
            }
            if depth >= bounds.depth {
                truncated = true;
                depth_cut = true;
                continue;
            }
            for (r, s) in succ {
                let s = match s {
                    Ok(s) => s,
                    Err(e) => {
                        errors.push(e);
                        continue;
                    }
                };
                let key = EquivKey::of(&s);
                let bucket = buckets.entry(key).or_default();
                let to = match bucket.iter().find(|&&k| canonical_equiv(&states[k], &s)) {
                    Some(&k) => k,
                    None => {
                        if states.len() >= bounds.width {
                            truncated = true;
                            continue;
                        }
                        states.push(s);
                        let k = states.len() - 1;
                        bucket.push(k);
                        next.push(k);
                        k
                    }
                };
                edges.push(Edge { from, to, kind: r.kind, thread: r.thread });
            }
        }
        frontier = next;
        depth += 1;
    }

    let has_cycle = cyclic(states.len(), &edges);
    let longest_path = if has_cycle || truncated { None } else { Some(longest(states.len(), &edges)) };
    normal_forms.sort_unstable();
    ExplorationReport {
        states,
        edges,
        max_depth,
        normal_forms,
        violations,
        divergent: has_cycle || depth_cut,
        has_cycle,
        truncated,
        longest_path,
        errors,
    }
}

fn adjacency(n: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.from].push(e.to);
    }
    adj
}

fn cyclic(n: usize, edges: &[Edge]) -> bool {
    // iterative three-colour DFS
    let adj = adjacency(n, edges);
    let mut colour = vec![0u8; n];
    for root in 0..n {
        if colour[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = 1;
        while let Some((v, i)) = stack.pop() {
            if i < adj[v].len() {
                stack.push((v, i + 1));
                let w = adj[v][i];
                match colour[w] {
                    0 => {
                        colour[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                colour[v] = 2;
            }
        }
    }
    false
}

/// Length of the longest path from state 0 in an acyclic graph.
fn longest(n: usize, edges: &[Edge]) -> usize {
    let adj = adjacency(n, edges);
    let mut memo: Vec<Option<usize>> = vec![None; n];
    // post-order without recursion
    let mut stack = vec![(0usize, false)];
    while let Some((v, done)) = stack.pop() {
        if memo[v].is_some() {
            continue;
        }
        if done {
            memo[v] = Some(adj[v].iter().map(|&w| memo[w].unwrap_or(0) + 1).max().unwrap_or(0));
        } else {
            stack.push((v, true));
            stack.extend(adj[v].iter().filter(|&&w| memo[w].is_none()).map(|&w| (w, false)));
        }
    }
    memo[0].unwrap_or(0)
}

/// Explores with the diamond check switched on.
pub fn check_diamond(start: &Canonical, bounds: Bounds) -> ExplorationReport {
    explore(start, bounds, true)
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub state: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub states: usize,
    pub failures: Vec<Failure>,
    pub truncated: bool,
}

/// Re-checks every reachable state at the original type and effect.
pub fn sweep_subject_reduction(u: &SourceUnit, j: &Judgement, bounds: Bounds) -> SweepReport {
    let report = explore(&canonicalize(&u.main), bounds, false);
    let failures: Vec<Failure> = report
        .states
        .par_iter()
        .filter_map(|s| {
            let unit = u.with_main(s.to_term());
            match check_against(&unit, j.mode, (&j.ty, &j.effect)) {
                Ok(_) => None,
                Err(e) => Some(Failure { state: s.print(), reason: e.to_string() }),
            }
        })
        .collect();
    let mut failures = failures;
    failures.extend(report.errors.iter().map(|e| Failure { state: String::new(), reason: e.clone() }));
    SweepReport { states: report.states.len(), failures, truncated: report.truncated }
}

/// Labels of every thread of every reachable normal form; a closed typable
/// program must never produce an Anomaly.
pub fn check_progress(start: &Canonical, bounds: Bounds) -> Vec<(String, Vec<ThreadClass>)> {
    let report = explore(start, bounds, false);
    report
        .normal_forms
        .iter()
        .map(|&i| (report.states[i].print(), classify_stuck(&report.states[i])))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TerminationReport {
    pub stratified_accepted: bool,
    pub terminates: bool,
    pub longest_path: Option<usize>,
    pub states: usize,
}

/// All paths end within `budget` steps (and the graph is finite).
pub fn check_termination(u: &SourceUnit, budget: usize) -> TerminationReport {
    let accepted = crate::typecheck::check_unit(u, CheckMode::StratifiedEffects).is_ok();
    let r = explore(&canonicalize(&u.main), Bounds { depth: budget, width: 100_000 }, false);
    TerminationReport {
        stratified_accepted: accepted,
        terminates: r.terminates(),
        longest_path: r.longest_path,
        states: r.states.len(),
    }
}

/// Runs `f` on a pool capped by `REGIONCALC_WORKERS` when that is set.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let n = std::env::var("REGIONCALC_WORKERS").ok().and_then(|v| v.parse::<usize>().ok());
    match n.filter(|&n| n > 0) {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}
