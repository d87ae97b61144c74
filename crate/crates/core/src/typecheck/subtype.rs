use std::collections::BTreeSet;

use crate::syntax::{Effect, Region, Type};

/// `R ⊢ a ≤ b`, where `dom` is `dom(R)`.
///
/// Only latent effects may grow; region types are compared exactly.
pub fn check_subtype(dom: &BTreeSet<Region>, a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::One, Type::One) | (Type::Behaviour, Type::Behaviour) => true,
        (Type::Bang(a), Type::Bang(b)) => check_subtype(dom, a, b),
        (Type::Reg(r, a), Type::Reg(s, b)) => r == s && a == b,
        (Type::Arrow(a, e, al), Type::Arrow(b, f, be)) => {
            effect_within(dom, e, f) && check_subtype(dom, b, a) && check_subtype(dom, al, be)
        }
        _ => false,
    }
}

/// `R ⊢ (α, e) ≤ (α', e')`.
pub fn check_subtype_eff(dom: &BTreeSet<Region>, a: (&Type, &Effect), b: (&Type, &Effect)) -> bool {
    effect_within(dom, a.1, b.1) && check_subtype(dom, a.0, b.0)
}

fn effect_within(dom: &BTreeSet<Region>, e: &Effect, f: &Effect) -> bool {
    e.is_subset(f) && f.iter().all(|r| dom.contains(r))
}
