use regioncalc::replay::replay;
use regioncalc::syntax::{parse_type, parse_unit};
use regioncalc::typecheck::{check_unit, CheckMode, TypeErrorKind};

use CheckMode::*;
use TypeErrorKind::*;

fn ty(u: &str, mode: CheckMode) -> Result<(String, String), TypeErrorKind> {
    let unit = parse_unit(u).expect("parses");
    check_unit(&unit, mode)
        .map(|j| {
            replay(&unit, mode, &j.derivation).unwrap_or_else(|e| panic!("replay: {e}"));
            (j.ty.to_string(), j.effect.to_string())
        })
        .map_err(|e| e.kind)
}

fn accepts(u: &str, mode: CheckMode, want: &str) {
    let (got, _) = ty(u, mode).unwrap_or_else(|k| panic!("{mode}: rejected with {k}: {u}"));
    assert_eq!(got, parse_type(want).unwrap().to_string(), "{mode}: {u}");
}

fn rejects(u: &str, mode: CheckMode, kind: TypeErrorKind) {
    match ty(u, mode) {
        Ok((t, _)) => panic!("{mode}: accepted at {t}: {u}"),
        Err(k) => assert_eq!(k, kind, "{mode}: {u}"),
    }
}

const EX6: &str = "region r volatile family AF : 1;
main fun x:!Reg[r]1. let !x = x in (get(x) | set(x, *))";

#[test]
fn unit_program() {
    for m in CheckMode::ALL {
        accepts("main *", m, "1");
    }
}

#[test]
fn example6_function() {
    accepts(EX6, Effects, "!Reg[r]1 -{r}> B");
    accepts(EX6, Plain, "!Reg[r]1 -o B");
    accepts(EX6, Confluent, "!Reg[r]1 -o B");
    accepts(EX6, StratifiedEffects, "!Reg[r]1 -{r}> B");
}

#[test]
fn example6_applied_to_banged_address() {
    let u = "region r volatile family AF : 1; free y exp : Reg[r]1;
main (fun x:!Reg[r]1. let !x = x in (get(x) | set(x, *))) !y";
    let (t, e) = ty(u, Effects).unwrap();
    assert_eq!((t.as_str(), e.as_str()), ("B", "{r}"));
}

#[test]
fn example7_functional() {
    let u = "region r volatile family AF : 1;
main fun f:Reg[r]1 -{r}> 1. fun g:Reg[r]1 -{r}> 1. nu y@r:1. (f y | g y)";
    accepts(u, Effects, "(Reg[r]1 -{r}> 1) -o (Reg[r]1 -{r}> 1) -{r}> B");
    let plain = "region r volatile family AF : 1;
main fun f:Reg[r]1 -o 1. fun g:Reg[r]1 -o 1. nu y@r:1. (f y | g y)";
    accepts(plain, Plain, "(Reg[r]1 -o 1) -o (Reg[r]1 -o 1) -o B");
    rejects(u, Plain, FormationFailure);
}

#[test]
fn bang_of_volatile_unrestricted_get() {
    let u = "region r volatile family UU : 1; free x exp : Reg[r]1; main !get(x)";
    rejects(u, Plain, AffineUnderBang);
}

#[test]
fn affine_variable_used_twice() {
    rejects("free x aff : 1; main (x | x)", Plain, UsageClash);
    accepts("free x exp : 1; main (x | x)", Plain, "B");
    rejects("main fun x:1. (x | x)", Plain, UsageClash);
    rejects("main fun x:1. !x", Plain, AffineUnderBang);
}

#[test]
fn example9_stratification() {
    let u = "region r persistent family WR : !(1 -{r}> 1);
main nu x@r:!(1 -{r}> 1). pset(x, !(fun y:1. let !f = get(x) in f y)); let !f = get(x) in f *";
    accepts(u, Effects, "1");
    rejects(u, StratifiedEffects, FormationFailure);
}

#[test]
fn confluence_controls() {
    let p5 = "region r persistent family UU : !(1 -o 1); free x exp : Reg[r]!(1 -o 1);
main (get(x) | store x <= !(fun y:1. y) | store x <= !(fun y:1. *))";
    // (P | S) keeps the type of P
    accepts(p5, Plain, "!(1 -o 1)");
    rejects(p5, Confluent, FamilyViolation);
    let p6 = "region r volatile family UU : 1 -o 1; free x exp : Reg[r](1 -o 1);
main (get(x) | store x <- (fun y:1. y) | store x <- (fun y:1. *))";
    accepts(p6, Plain, "1 -o 1");
    rejects(p6, Confluent, FamilyViolation);
    let p7 = "region r volatile family WR : 1; free x exp : Reg[r]1;
main ((fun y:1. y) get(x) | (fun y:1. y) get(x) | store x <- *)";
    accepts(p7, Plain, "B");
    rejects(p7, Confluent, ConfluenceRestriction);
    let p8 = "region r persistent family WR : !1; free x exp : Reg[r]!1;
main (get(x) | get(x) | store x <= !*)";
    accepts(p8, Confluent, "B");
}

#[test]
fn store_kinds() {
    rejects("region r persistent family WR : !1; free x exp : Reg[r]!1; main set(x, !*)", Plain, StoreKindMismatch);
    rejects("region r volatile family AF : 1; free x exp : Reg[r]1; main pset(x, *)", Plain, StoreKindMismatch);
    rejects("region r volatile family AF : 1; free x exp : Reg[r]1; main store x <= *", Plain, StoreKindMismatch);
}

#[test]
fn shapes() {
    rejects("main * *", Plain, ShapeMismatch);
    rejects("main let !x = * in x", Plain, ShapeMismatch);
    rejects("free x exp : 1; main get(x)", Plain, ShapeMismatch);
    rejects("main (fun x:!1. x) *", Plain, ShapeMismatch);
    rejects("main y", Plain, FormationFailure);
}

#[test]
fn subsumption_at_arguments() {
    let u = "region r volatile family AF : 1;
main (fun f:1 -{r}> 1. f *) (fun y:1. y)";
    accepts(u, Effects, "1");
    let v = "region r volatile family AF : 1; free x exp : Reg[r]1;
main (fun f:1 -o 1. f *) (fun y:1. get(x))";
    rejects(v, Effects, SubtypeFailure);
}

#[test]
fn values_and_stores_have_no_effect() {
    let u = "region r volatile family AF : 1; free x exp : Reg[r]1; main (fun y:1. get(x))";
    assert_eq!(ty(u, Effects).unwrap().1, "{}");
    let s = "region r volatile family AF : 1; free x exp : Reg[r]1; main store x <- *";
    assert_eq!(ty(s, Effects).unwrap().1, "{}");
}

#[test]
fn errors_carry_positions() {
    let unit = parse_unit("free x aff : 1;\nmain (x |\n  x)").unwrap();
    let e = check_unit(&unit, Plain).unwrap_err();
    assert!(e.span.is_some());
}

#[test]
fn replay_rejects_tampered_trees() {
    let unit = parse_unit(EX6).unwrap();
    let j = check_unit(&unit, Effects).unwrap();
    let mut d = j.derivation.clone();
    d.effect = regioncalc::syntax::Effect::single("r".into());
    assert!(replay(&unit, Effects, &d).is_err());
    let mut d = j.derivation.clone();
    d.premises[0].premises[1].premises[1].ty = regioncalc::syntax::Type::Behaviour;
    assert!(replay(&unit, Effects, &d).is_err());
    // the same tree is not a derivation in a mode without effects
    assert!(replay(&unit, Plain, &j.derivation).is_err());
}
