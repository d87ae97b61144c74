//! Formation of types, variable contexts and region contexts.
//!
//! Unstratified formation lets every region's content mention any declared
//! region (itself included). Stratified formation reads the declarations in
//! order and lets each content type mention only strictly earlier regions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::syntax::{FreeDecl, Region, RegionDecl, RegionKind, Type};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormationMode {
    Unstratified,
    Stratified,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("{subject}: {message}")]
pub struct FormationError {
    /// The offending region, variable or type.
    pub subject: String,
    pub message: String,
}

fn fail(subject: impl ToString, message: impl Into<String>) -> FormationError {
    FormationError { subject: subject.to_string(), message: message.into() }
}

fn lookup<'a>(decls: &'a [RegionDecl], r: &Region) -> Option<&'a RegionDecl> {
    decls.iter().find(|d| &d.name == r)
}

/// `R ↓ α`: every region in `α` is declared, every `Reg[r] B` agrees with
/// the declared content of `r`, and latent effects stay inside `dom(R)`.
pub fn compat(decls: &[RegionDecl], ty: &Type) -> Result<(), FormationError> {
    match ty {
        Type::One | Type::Behaviour => Ok(()),
        Type::Bang(a) => compat(decls, a),
        Type::Arrow(a, e, b) => {
            compat(decls, a)?;
            compat(decls, b)?;
            match e.iter().find(|r| lookup(decls, r).is_none()) {
                Some(r) => Err(fail(ty, format!("latent effect mentions undeclared region `{r}`"))),
                None => Ok(()),
            }
        }
        Type::Reg(r, a) => match lookup(decls, r) {
            None => Err(fail(ty, format!("region `{r}` is not declared"))),
            Some(d) if &d.content != a.as_ref() => Err(fail(
                ty,
                format!("region `{r}` holds {}, not {a}", d.content),
            )),
            Some(_) => Ok(()),
        },
    }
}

/// `R ⊢`: distinct names, persistent contents banged, and every content
/// type well formed (against all of R, or against the earlier prefix).
pub fn wf_region_ctx(decls: &[RegionDecl], mode: FormationMode) -> Result<(), FormationError> {
    let mut seen = BTreeSet::new();
    for (i, d) in decls.iter().enumerate() {
        if !seen.insert(&d.name) {
            return Err(fail(&d.name, "region declared twice"));
        }
        if d.kind == RegionKind::Persistent && !matches!(d.content, Type::Bang(_)) {
            return Err(fail(
                &d.name,
                format!("persistent region must hold a banged type, found {}", d.content),
            ));
        }
        if !d.content.behaviour_well_placed(true) {
            return Err(fail(&d.name, "region content cannot be B"));
        }
        let scope = match mode {
            FormationMode::Unstratified => decls,
            FormationMode::Stratified => &decls[..i],
        };
        compat(scope, &d.content).map_err(|e| {
            let why = match mode {
                FormationMode::Unstratified => e.message,
                FormationMode::Stratified => {
                    format!("{} (only earlier regions may be used)", e.message)
                }
            };
            fail(&d.name, format!("content {} is not well formed: {why}", d.content))
        })?;
    }
    Ok(())
}

/// `R ⊢ α`.
pub fn wf_type(
    decls: &[RegionDecl],
    ty: &Type,
    mode: FormationMode,
) -> Result<(), FormationError> {
    wf_region_ctx(decls, mode)?;
    compat(decls, ty)
}

/// `R ⊢ Γ`.
pub fn wf_var_ctx(
    decls: &[RegionDecl],
    free: &[FreeDecl],
    mode: FormationMode,
) -> Result<(), FormationError> {
    wf_region_ctx(decls, mode)?;
    let mut seen = BTreeSet::new();
    for d in free {
        if !seen.insert(&d.name) {
            return Err(fail(&d.name, "variable declared twice"));
        }
        compat(decls, &d.ty).map_err(|e| fail(&d.name, e.to_string()))?;
    }
    Ok(())
}

/// Regions a type depends on, closed under the contents of those regions.
pub fn region_closure(decls: &[RegionDecl], seeds: impl IntoIterator<Item = Region>) -> BTreeSet<Region> {
    let mut out = BTreeSet::new();
    let mut todo: Vec<Region> = seeds.into_iter().collect();
    while let Some(r) = todo.pop() {
        if out.insert(r.clone()) {
            if let Some(d) = lookup(decls, &r) {
                let mut more = BTreeSet::new();
                d.content.regions(&mut more);
                todo.extend(more);
            }
        }
    }
    out
}
