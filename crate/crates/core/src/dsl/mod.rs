//! Front end for the `.ped` controller language: parsing, static checks and
//! canonical rendering.

mod ast;
mod parser;
mod render;
mod validate;

use thiserror::Error;

pub use ast::{GuardExpr, Literal, ModelAst, Rule, Stmt, VarKind, OUTPUT_PLANE, OUTPUT_TYPE};
pub use parser::{parse, SyntaxError};
pub use render::{render, render_ast, render_guard};
pub use validate::{validate, ValidatedModel, ValidationError};

/// Source of the bundled pedal-handling example model.
pub const FIXTURE_SOURCE: &str = include_str!("../../fixtures/pedal.ped");

/// The example model with the start-condition check removed from `FRFluoOn`.
pub const FIXTURE_UNCONDITIONAL_SOURCE: &str = include_str!("../../fixtures/pedal_unconditional.ped");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// Parses and validates in one go.
pub fn load(source: &str) -> Result<ValidatedModel, ModelError> {
    Ok(validate(parse(source)?)?)
}

pub fn fixture() -> ValidatedModel {
    load(FIXTURE_SOURCE).expect("bundled fixture is valid")
}
