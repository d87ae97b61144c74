//! An affine-intuitionistic calculus with regions: syntax, usage algebra,
//! type systems, small-step semantics, and executable metatheory.

pub mod syntax;
pub mod typecheck;
pub mod analysis;
pub mod cli;
pub mod replay;
pub mod semantics;
pub mod translate;
pub mod usage;
pub mod wellformed;
