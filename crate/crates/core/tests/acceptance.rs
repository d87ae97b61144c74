//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{brute_equiv, corpus, entry, Entry, Gen};
use regioncalc::analysis::{check_diamond, check_progress, check_termination, explore, sweep_subject_reduction, Bounds};
use regioncalc::replay::replay;
use regioncalc::semantics::{canonicalize, equiv, run_det, RunStatus, ThreadClass};
use regioncalc::syntax::{parse_program, parse_type, parse_unit, Name, RegionKind, Type};
use regioncalc::translate::{check_preservation, check_simulation, print_iterm_plain, translate, Preservation};
use regioncalc::typecheck::{check_unit, CheckMode, TypeErrorKind};
use regioncalc::usage::{
    ctx_sum, is_aff_hyp, regionctx_sum, usage_sum, usagevec_sum, Hyp, RegionContext, RegionEntry, Usage, UsageFamily,
    UsageVec, VarContext,
};
use regioncalc::wellformed::{compat, wf_region_ctx, FormationMode};

use CheckMode::*;
use Usage::{Many, One, Zero};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn uv(w: Usage, r: Usage) -> UsageVec {
    UsageVec::new(w, r).expect("a family member")
}

fn ty(s: &str) -> Type {
    parse_type(s).unwrap()
}

fn typed(src: &str, mode: CheckMode) -> Result<(String, String), TypeErrorKind> {
    let u = parse_unit(src).unwrap();
    check_unit(&u, mode).map(|j| (j.ty.to_string(), j.effect.to_string())).map_err(|e| e.kind)
}

fn regions(src: &str) -> Vec<regioncalc::syntax::RegionDecl> {
    parse_unit(&format!("{src} main *")).unwrap().regions
}

fn rctx(entries: &[(&str, UsageVec, &str)]) -> RegionContext {
    let mut r = RegionContext::new();
    for (n, v, c) in entries {
        r.insert((*n).into(), RegionEntry { usage: *v, kind: RegionKind::Volatile, content: ty(c) });
    }
    r
}

fn golden() -> Outcome {
    // 1: structural equivalence
    let l = parse_program("((nu x@r:1. fun y:1 -o 1. y) (nu x2@r:1. fun y2:1. y2)) * | get(z)").unwrap();
    let r = parse_program("nu a@r:1. nu b@r:1. (((fun y:1 -o 1. y) (fun y2:1. y2)) * | get(z))").unwrap();
    ensure!(equiv(&l, &r), "example 1 not equivalent");

    // 2: variable contexts
    let (a, b, c) = (ty("1"), ty("B"), ty("1 -o 1"));
    let g1: VarContext = [(Name::new("x"), One, a.clone()), (Name::new("y"), Many, b.clone())].into_iter().collect();
    let g2: VarContext = [(Name::new("y"), Many, b.clone()), (Name::new("z"), One, c.clone())].into_iter().collect();
    let want: VarContext =
        [(Name::new("x"), One, a.clone()), (Name::new("y"), Many, b.clone()), (Name::new("z"), One, c)].into_iter().collect();
    ensure!(ctx_sum(&g1, &g2).ok() == Some(want), "example 2 sum");
    let g3: VarContext = [(Name::new("y"), One, b)].into_iter().collect();
    ensure!(ctx_sum(&g1, &g3).is_err(), "example 2 undefined sum");
    ensure!(usage_sum(One, One).is_none(), "1 + 1 defined");

    // 3: usage vectors
    ensure!(usagevec_sum(uv(Many, Many), uv(Zero, Many)).is_none(), "example 3 cross family");
    ensure!(usagevec_sum(uv(One, Many), uv(One, Many)).is_none(), "example 3 two writers");

    // 4: region contexts
    let r1 = rctx(&[("r1", uv(One, Many), "1"), ("r2", uv(Zero, One), "B")]);
    let r2 = rctx(&[("r1", uv(Zero, Many), "1"), ("r2", uv(One, Zero), "B")]);
    let sum = regionctx_sum(&r1, &r2).map_err(|e| e.to_string())?;
    ensure!(sum.get(&"r1".into()).map(|e| e.usage) == Some(uv(One, Many)), "example 4 r1");
    ensure!(sum.get(&"r2".into()).map(|e| e.usage) == Some(uv(One, One)), "example 4 r2");
    let w = rctx(&[("r", uv(One, Many), "B")]);
    ensure!(regionctx_sum(&w, &w).is_err(), "example 4 two writers");
    ensure!(
        regionctx_sum(&rctx(&[("r", uv(Zero, Many), "B")]), &rctx(&[("r", uv(One, Zero), "B")])).is_err(),
        "example 4 cross family"
    );

    // 5: formation
    ensure!(compat(&regions("region r volatile family UU : 1 -o 1;"), &ty("Reg[r](1 -o 1)")).is_ok(), "example 5 accept");
    ensure!(compat(&regions("region r volatile family UU : 1;"), &ty("Reg[r](1 -o 1)")).is_err(), "example 5 reject");

    // 6
    let ex6 = "region r volatile family AF : 1;
main fun x:!Reg[r]1. let !x = x in (get(x) | set(x, *))";
    ensure!(typed(ex6, Plain).map(|t| t.0) == Ok(ty("!Reg[r]1 -o B").to_string()), "example 6 type");
    ensure!(typed(ex6, Effects).map(|t| t.0) == Ok(ty("!Reg[r]1 -{r}> B").to_string()), "example 6 effects");
    let applied = "region r volatile family AF : 1; free y exp : Reg[r]1;
main (fun x:!Reg[r]1. let !x = x in (get(x) | set(x, *))) !y";
    ensure!(typed(applied, Effects) == Ok(("B".into(), "{r}".into())), "example 6 applied");

    // 7
    let ex7 = "region r volatile family AF : 1;
main fun f:Reg[r]1 -o 1. fun g:Reg[r]1 -o 1. nu y@r:1. (f y | g y)";
    ensure!(
        typed(ex7, Plain).map(|t| t.0) == Ok(ty("(Reg[r]1 -o 1) -o (Reg[r]1 -o 1) -o B").to_string()),
        "example 7 type"
    );

    // 8
    let ex8 = regions("region r volatile family UU : 1 -{r}> 1;");
    ensure!(wf_region_ctx(&ex8, FormationMode::Unstratified).is_ok(), "example 8 unstratified");
    ensure!(wf_region_ctx(&ex8, FormationMode::Stratified).is_err(), "example 8 stratified");

    // 9
    let ex9 = entry("ex9");
    ensure!(check_unit(&ex9.unit, Effects).is_ok(), "example 9 not typable");
    let run = run_det(&canonicalize(&ex9.unit.main), 10_000).map_err(|e| e.to_string())?;
    ensure!(run.status == RunStatus::BudgetExceeded, "example 9 terminated");

    // 10
    let ok = regions("region r volatile family UU : 1; region s volatile family UU : 1 -{r}> 1;");
    ensure!(wf_region_ctx(&ok, FormationMode::Stratified).is_ok(), "example 10 accept");
    let bad = regions("region s volatile family UU : 1 -{s}> 1;");
    ensure!(wf_region_ctx(&bad, FormationMode::Stratified).is_err(), "example 10 reject");
    Ok("examples 1-10".into())
}

fn controls() -> Outcome {
    for (name, kind) in [
        ("prog5", TypeErrorKind::FamilyViolation),
        ("prog6", TypeErrorKind::FamilyViolation),
        ("prog7", TypeErrorKind::ConfluenceRestriction),
    ] {
        let e = entry(name);
        match check_unit(&e.unit, Confluent) {
            Ok(_) => return Err(format!("{name} accepted by the confluent checker")),
            Err(err) => ensure!(err.kind == kind, "{name}: {} instead of {kind}", err.kind),
        }
    }
    let p8 = entry("prog8");
    ensure!(check_unit(&p8.unit, Confluent).is_ok(), "prog8 rejected");
    let r = check_diamond(&canonicalize(&p8.unit.main), Bounds::default());
    ensure!(r.normal_forms.len() == 1, "prog8 has {} normal forms", r.normal_forms.len());
    ensure!(r.violations.is_empty(), "prog8 has diamond violations");
    Ok("prog5-7 rejected, prog8: 1 normal form, 0 violations".into())
}

fn subject_reduction(all: &[Entry]) -> Outcome {
    let typable: Vec<&Entry> = all.iter().filter(|e| !e.accepts.is_empty()).collect();
    ensure!(typable.len() >= 30, "only {} typable programs", typable.len());
    let mut states = 0;
    for e in &typable {
        for &m in &e.accepts {
            let j = check_unit(&e.unit, m).map_err(|err| format!("{} in {m}: {err}", e.name))?;
            let r = sweep_subject_reduction(&e.unit, &j, Bounds { depth: 1000, width: 100_000 });
            ensure!(r.failures.is_empty(), "{} in {m}: {:?}", e.name, r.failures[0]);
            ensure!(!r.truncated, "{} in {m}: exploration truncated", e.name);
            states += r.states;
        }
    }
    Ok(format!("{} programs, {states} states re-checked", typable.len()))
}

fn confluence(all: &[Entry]) -> Outcome {
    let mut n = 0;
    for e in all.iter().filter(|e| e.accepted(Confluent) || e.accepted(StratifiedConfluent)) {
        let r = check_diamond(&canonicalize(&e.unit.main), Bounds { depth: 10_000, width: 100_000 });
        ensure!(!r.truncated, "{}: truncated", e.name);
        ensure!(r.violations.is_empty(), "{}: {} diamond violations", e.name, r.violations.len());
        ensure!(r.normal_forms.len() == 1, "{}: {} normal forms", e.name, r.normal_forms.len());
        n += 1;
    }
    Ok(format!("{n} confluent programs"))
}

fn progress(all: &[Entry]) -> Outcome {
    let mut n = 0;
    for e in all.iter().filter(|e| e.closed() && !e.accepts.is_empty()) {
        for (state, classes) in check_progress(&canonicalize(&e.unit.main), Bounds::default()) {
            ensure!(!classes.contains(&ThreadClass::Anomaly), "{}: anomaly in {state}", e.name);
        }
        n += 1;
    }
    Ok(format!("{n} closed programs, no anomaly"))
}

fn termination(all: &[Entry]) -> Outcome {
    let accepted: Vec<&Entry> = all.iter().filter(|e| e.accepted(StratifiedEffects)).collect();
    ensure!(accepted.len() >= 15, "only {} stratified programs", accepted.len());
    for e in &accepted {
        let r = check_termination(&e.unit, 10_000);
        ensure!(r.stratified_accepted && r.terminates, "{} does not terminate", e.name);
    }
    let ex9 = entry("ex9");
    let r = check_termination(&ex9.unit, 10_000);
    ensure!(!r.stratified_accepted, "example 9 is stratified-accepted");
    ensure!(!r.terminates, "example 9 terminates");
    let run = run_det(&canonicalize(&ex9.unit.main), 10_000).map_err(|e| e.to_string())?;
    ensure!(run.status == RunStatus::BudgetExceeded, "example 9 run terminated");
    Ok(format!("{} stratified programs terminate; example 9 diverges", accepted.len()))
}

const SPECIMEN: &str = "region r1 volatile family AF : 1; region r2 volatile family AF : 1;
region r3 volatile family AF : 1; region r4 volatile family AF : 1;
free x1 aff : Reg[r1]1;
free m exp : !Reg[r2]1;
main x1 | (let !x2 = m in x2) | (fun x3:Reg[r3]1. x3) | (nu x4@r4:1. x4)";

fn translation(all: &[Entry]) -> Outcome {
    let (mut exact, mut sub) = (0, 0);
    for e in all.iter().filter(|e| e.accepted(StratifiedEffects)) {
        let j = check_unit(&e.unit, StratifiedEffects).map_err(|err| err.to_string())?;
        match check_preservation(&e.unit, &j, FormationMode::Stratified) {
            Ok(Preservation::Exact) => exact += 1,
            Ok(Preservation::Subtype) => sub += 1,
            Err(err) => return Err(format!("{}: {err}", e.name)),
        }
    }
    let u = parse_unit(SPECIMEN).unwrap();
    let j = check_unit(&u, StratifiedEffects).map_err(|e| e.to_string())?;
    let t = translate(&u, &j).map_err(|e| e.to_string())?;
    let printed = print_iterm_plain(&t.term);
    ensure!(printed == "r1 | (λx2.r2)(m) | λx3.r3 | r4", "specimen printed as {printed}");
    Ok(format!("{exact} exact, {sub} up to subtyping; specimen verbatim"))
}

fn simulation(all: &[Entry]) -> Outcome {
    let mut steps = 0;
    for e in all.iter().filter(|e| e.accepted(Effects)) {
        let r = check_simulation(&e.unit, Effects, Bounds { depth: 1000, width: 100_000 });
        ensure!(r.holds(), "{}: {}", e.name, r.failures[0]);
        ensure!(r.ambiguous == 0, "{}: {} ambiguous steps", e.name, r.ambiguous);
        ensure!(!r.truncated || e.name == "ex9", "{}: truncated", e.name);
        steps += r.steps;
    }
    Ok(format!("{steps} steps matched"))
}

fn algebra() -> Outcome {
    for a in Usage::ALL {
        ensure!(usage_sum(a, Zero) == Some(a) && usage_sum(Zero, a) == Some(a), "0 not neutral for {a}");
        for b in Usage::ALL {
            ensure!(usage_sum(a, b) == usage_sum(b, a), "{a} + {b} not commutative");
            for c in Usage::ALL {
                let l = usage_sum(a, b).and_then(|ab| usage_sum(ab, c));
                let r = usage_sum(b, c).and_then(|bc| usage_sum(a, bc));
                ensure!(l == r, "({a} + {b}) + {c} not associative");
            }
        }
    }
    let vs: Vec<UsageVec> = UsageVec::all().collect();
    ensure!(vs.len() == 7, "{} vectors", vs.len());
    for f in UsageFamily::ALL {
        for &v in f.members() {
            ensure!(usagevec_sum(f.neutral(), v) == Some(v), "neutral of {f:?} fails on {v}");
        }
    }
    for &a in &vs {
        for &b in &vs {
            ensure!(usagevec_sum(a, b) == usagevec_sum(b, a), "{a} + {b} not commutative");
            for &c in &vs {
                let l = usagevec_sum(a, b).and_then(|ab| usagevec_sum(ab, c));
                let r = usagevec_sum(b, c).and_then(|bc| usagevec_sum(a, bc));
                ensure!(l == r, "({a} + {b}) + {c} not associative");
            }
        }
    }
    // (write, read, volatile, persistent)
    let table = [
        (Zero, Zero, false, false),
        (One, Zero, true, true),
        (Zero, One, true, true),
        (One, One, true, true),
        (One, Many, true, true),
        (Zero, Many, true, false),
        (Many, Many, true, false),
    ];
    for (w, r, vol, per) in table {
        let v = uv(w, r);
        ensure!(is_aff_hyp(Hyp::Region(v, RegionKind::Volatile)) == vol, "aff volatile {v}");
        ensure!(is_aff_hyp(Hyp::Region(v, RegionKind::Persistent)) == per, "aff persistent {v}");
    }
    for (u, want) in [(Zero, false), (One, true), (Many, false)] {
        ensure!(is_aff_hyp(Hyp::Var(u)) == want, "aff of variable usage {u}");
    }
    Ok("3 usages, 7 vectors, 14-row aff table".into())
}

fn oracles(all: &[Entry]) -> Outcome {
    let mut g = Gen::new(2024);
    let mut pairs = 0;
    for i in 0..150 {
        let p = g.small(12);
        let q = if i % 2 == 0 {
            g.scramble(&p, 6)
        } else {
            g.small(12)
        };
        let fast = equiv(&p, &q);
        let slow = brute_equiv(&p, &q, 6);
        ensure!(fast == slow, "equiv {fast} but rewriting {slow} on {p} and {q}");
        pairs += 1;
    }
    let mut trees = 0;
    for e in all {
        for &m in &e.accepts {
            let j = check_unit(&e.unit, m).map_err(|err| err.to_string())?;
            replay(&e.unit, m, &j.derivation).map_err(|err| format!("{} in {m}: {err}", e.name))?;
            trees += 1;
            let graph = explore(&canonicalize(&e.unit.main), Bounds { depth: 1000, width: 10_000 }, false);
            for s in &graph.states {
                let unit = e.unit.with_main(s.to_term());
                let j = check_unit(&unit, m).map_err(|err| format!("{}: {err}", s.print()))?;
                replay(&unit, m, &j.derivation).map_err(|err| format!("{}: {err}", s.print()))?;
                trees += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs agree, {trees} derivations replayed"))
}

/// Name, check and time limit of one criterion.
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>, Option<Duration>);

fn main() {
    let all = corpus();
    let criteria: Vec<Criterion> = vec![
        ("golden examples", Box::new(golden), Some(Duration::from_secs(1))),
        ("confluence controls", Box::new(controls), None),
        ("subject reduction", Box::new(|| subject_reduction(&all)), Some(Duration::from_secs(60))),
        ("strong confluence", Box::new(|| confluence(&all)), None),
        ("progress", Box::new(|| progress(&all)), None),
        ("termination", Box::new(|| termination(&all)), None),
        ("translation", Box::new(|| translation(&all)), None),
        ("simulation", Box::new(|| simulation(&all)), None),
        ("algebra", Box::new(algebra), None),
        ("oracles", Box::new(|| oracles(&all)), None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let took = start.elapsed();
        if let (Ok(msg), Some(limit)) = (&outcome, limit) {
            if took > *limit {
                outcome = Err(format!("{msg}, but took {took:.2?} (limit {limit:?})"));
            }
        }
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} ({took:.2?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} ({took:.2?})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
