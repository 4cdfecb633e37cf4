//! Toolchain for a guarded-rule reactive-controller language.
//!
//! A model written in the `.ped` language is given an LTS semantics with
//! alternating input and output phases ([`semantics`]). A second, independently
//! written back end compiles models to stack-machine code ([`process_ir`]).
//! The realizations are cross-checked with strong and branching bisimulation
//! ([`equivalence`]), modal mu-calculus properties ([`mucalc`]) and
//! on-the-fly model-based testing against a live system ([`mbt`]).

pub mod dsl;
pub mod equivalence;
pub mod mbt;
pub mod lts;
pub mod mucalc;
pub mod process_ir;
pub mod semantics;
#[cfg(feature = "service")]
pub mod service;
