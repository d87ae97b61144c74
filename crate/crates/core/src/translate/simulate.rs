//! Lockstep simulation of source reductions by target reductions.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::iterm::{i_step_all, IProgram};
use super::translate;
use crate::analysis::Bounds;
use crate::semantics::{apply, canonical_equiv, canonicalize, find_redexes, Canonical, EquivKey};
use crate::syntax::SourceUnit;
use crate::typecheck::{check_unit, CheckMode};

#[derive(Clone, Debug, Default, Serialize)]
pub struct SimulationReport {
    /// Related pairs visited.
    pub pairs: usize,
    /// Source steps matched by a target step.
    pub steps: usize,
    pub failures: Vec<String>,
    /// Most stores the target kept beyond those of the source.
    pub max_surplus: usize,
    /// Steps where several distinct target successors matched.
    pub ambiguous: usize,
    pub truncated: bool,
}

impl SimulationReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn image(u: &SourceUnit, mode: CheckMode, p: &Canonical) -> Result<IProgram, String> {
    let unit = u.with_main(p.to_term());
    let j = check_unit(&unit, mode).map_err(|e| format!("{} is not typable: {e}", p.print()))?;
    let tr = translate(&unit, &j).map_err(|e| e.to_string())?;
    Ok(IProgram::from_term(&tr.term))
}

/// `small` ⊆ `big` as multisets of sorted keys.
fn sub_multiset(small: &[String], big: &[String]) -> bool {
    let mut j = 0;
    for s in small {
        while j < big.len() && big[j] < *s {
            j += 1;
        }
        if j == big.len() || big[j] != *s {
            return false;
        }
        j += 1;
    }
    true
}

/// Every source step from every reachable related pair `(P, Q)` must be
/// matched by one target step from `Q` to some `Q'` whose threads are those
/// of the image of the reduct and whose stores include the image's stores.
/// Sorted thread and store keys of a target program.
type TargetKey = (Vec<String>, Vec<String>);

pub fn check_simulation(u: &SourceUnit, mode: CheckMode, bounds: Bounds) -> SimulationReport {
    let mut report = SimulationReport::default();
    let start = canonicalize(&u.main);
    let q0 = match image(u, mode, &start) {
        Ok(q) => q,
        Err(e) => {
            report.failures.push(e);
            return report;
        }
    };
    let mut seen: HashMap<(EquivKey, TargetKey), Vec<Canonical>> = HashMap::new();
    seen.entry((EquivKey::of(&start), q0.key())).or_default().push(start.clone());
    let mut queue = VecDeque::from([(start, q0, 0usize)]);
    while let Some((p, q, depth)) = queue.pop_front() {
        report.pairs += 1;
        let redexes = find_redexes(&p);
        if redexes.is_empty() {
            continue;
        }
        if depth >= bounds.depth {
            report.truncated = true;
            continue;
        }
        let targets = i_step_all(&q);
        for r in redexes {
            let p2 = match apply(&p, r) {
                Ok(p2) => p2,
                Err(e) => {
                    report.failures.push(format!("{}: {e}", p.print()));
                    continue;
                }
            };
            let f = match image(u, mode, &p2) {
                Ok(f) => f,
                Err(e) => {
                    report.failures.push(e);
                    continue;
                }
            };
            let (threads, stores) = f.key();
            let mut matches: Vec<&IProgram> = Vec::new();
            for (_, _, q2) in &targets {
                if q2.thread_keys() == threads
                    && sub_multiset(&stores, &q2.store_keys())
                    && !matches.iter().any(|m| m.key() == q2.key())
                {
                    matches.push(q2);
                }
            }
            let Some(q2) = matches.first() else {
                report.failures.push(format!(
                    "{} --{:?}--> {} has no counterpart from {}",
                    p.print(),
                    r.kind,
                    p2.print(),
                    super::print_iterm(&q.to_term())
                ));
                continue;
            };
            report.steps += 1;
            if matches.len() > 1 {
                report.ambiguous += 1;
            }
            report.max_surplus = report.max_surplus.max(q2.stores.len().saturating_sub(f.stores.len()));
            let q2 = (*q2).clone();
            let bucket = seen.entry((EquivKey::of(&p2), q2.key())).or_default();
            if bucket.iter().any(|s| canonical_equiv(s, &p2)) {
                continue;
            }
            if report.pairs + queue.len() >= bounds.width {
                report.truncated = true;
                continue;
            }
            bucket.push(p2.clone());
            queue.push_back((p2, q2, depth + 1));
        }
    }
    report
}
