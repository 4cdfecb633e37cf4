//! Alternation-free modal mu-calculus with boolean fixpoint parameters and
//! quantification over the finite X-ray and plane domains.
//!
//! Property files (`.mcf`) start with optional `bind <role> = <action>` lines
//! that rename action names in the formula, followed by one formula.

mod check;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use check::{check, matches, satisfying_states, CheckError, CheckResult};
pub use parser::parse_formula;

use crate::semantics::{Plane, XRay};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    XRay,
    Plane,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Bool => "Bool",
            Sort::XRay => "XRay",
            Sort::Plane => "Plane",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    XRay(XRay),
    Plane(Plane),
}

impl Value {
    pub fn domain(sort: Sort) -> Vec<Value> {
        match sort {
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::XRay => XRay::ALL.iter().map(|x| Value::XRay(*x)).collect(),
            Sort::Plane => Plane::ALL.iter().map(|p| Value::Plane(*p)).collect(),
        }
    }
}

/// Expressions over data variables (fixpoint parameters and quantified or
/// pattern-bound variables).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DataExpr {
    Lit(Value),
    Var(String),
    Eq(Box<DataExpr>, Box<DataExpr>),
    Not(Box<DataExpr>),
    And(Box<DataExpr>, Box<DataExpr>),
    Or(Box<DataExpr>, Box<DataExpr>),
}

/// Action formulas: sets of labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActForm {
    /// Every label, including `tau`.
    True,
    False,
    Action(String),
    Tau,
    /// `output(x, p)`; a variable that is not in scope binds the label's
    /// value for the formula under the modality.
    Output(DataExpr, DataExpr),
    Not(Box<ActForm>),
    And(Box<ActForm>, Box<ActForm>),
    Or(Box<ActForm>, Box<ActForm>),
    Forall(Vec<(String, Sort)>, Box<ActForm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// A boolean data predicate.
    Data(DataExpr),
    /// Negation of a formula without modalities or fixpoint variables.
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// The antecedent is modality-free.
    Implies(Box<Formula>, Box<Formula>),
    Box(ActForm, Box<Formula>),
    Diamond(ActForm, Box<Formula>),
    /// `[A*]phi`, the greatest solution of `Z = phi && [A]Z`.
    BoxStar(ActForm, Box<Formula>),
    Nu(Fixpoint),
    Mu(Fixpoint),
    VarApp(String, Vec<DataExpr>),
    Forall(Vec<(String, Sort)>, Box<Formula>),
    Exists(Vec<(String, Sort)>, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fixpoint {
    pub var: String,
    pub params: Vec<(String, bool)>,
    pub body: Box<Formula>,
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    /// True when the formula contains no modality, fixpoint or variable
    /// application, so negating it cannot break monotonicity.
    pub fn is_data_only(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Data(_) => true,
            Formula::Not(f) => f.is_data_only(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => a.is_data_only() && b.is_data_only(),
            Formula::Forall(_, f) | Formula::Exists(_, f) => f.is_data_only(),
            _ => false,
        }
    }

    /// Action names mentioned anywhere in the formula.
    pub fn action_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_actions(&mut |a| {
            out.insert(a.to_string());
        });
        out
    }

    fn visit_actions(&self, f: &mut impl FnMut(&str)) {
        match self {
            Formula::Box(a, g) | Formula::Diamond(a, g) | Formula::BoxStar(a, g) => {
                a.visit_actions(f);
                g.visit_actions(f);
            }
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => g.visit_actions(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_actions(f);
                b.visit_actions(f);
            }
            Formula::Nu(fp) | Formula::Mu(fp) => fp.body.visit_actions(f),
            Formula::True | Formula::False | Formula::Data(_) | Formula::VarApp(..) => {}
        }
    }

    fn rename_actions(&mut self, map: &dyn Fn(&str) -> Option<String>) {
        match self {
            Formula::Box(a, g) | Formula::Diamond(a, g) | Formula::BoxStar(a, g) => {
                a.rename(map);
                g.rename_actions(map);
            }
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => g.rename_actions(map),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.rename_actions(map);
                b.rename_actions(map);
            }
            Formula::Nu(fp) | Formula::Mu(fp) => fp.body.rename_actions(map),
            Formula::True | Formula::False | Formula::Data(_) | Formula::VarApp(..) => {}
        }
    }
}

impl ActForm {
    fn visit_actions(&self, f: &mut impl FnMut(&str)) {
        match self {
            ActForm::Action(a) => f(a),
            ActForm::Not(a) | ActForm::Forall(_, a) => a.visit_actions(f),
            ActForm::And(a, b) | ActForm::Or(a, b) => {
                a.visit_actions(f);
                b.visit_actions(f);
            }
            ActForm::True | ActForm::False | ActForm::Tau | ActForm::Output(..) => {}
        }
    }

    fn rename(&mut self, map: &dyn Fn(&str) -> Option<String>) {
        match self {
            ActForm::Action(a) => {
                if let Some(b) = map(a) {
                    *a = b;
                }
            }
            ActForm::Not(a) | ActForm::Forall(_, a) => a.rename(map),
            ActForm::And(a, b) | ActForm::Or(a, b) => {
                a.rename(map);
                b.rename(map);
            }
            ActForm::True | ActForm::False | ActForm::Tau | ActForm::Output(..) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("`{var}` takes {expected} argument(s) but {found} were given")]
    Arity { var: String, expected: usize, found: usize },
    #[error("fixpoint variable `{0}` occurs under a fixpoint of the other kind")]
    Alternation(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("negation is only allowed on data predicates and action formulas")]
    NonMonotone,
    #[error("duplicate binding for role `{0}`")]
    DuplicateBinding(String),
}

/// A parsed `.mcf` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyFile {
    pub bindings: Vec<(String, String)>,
    /// The formula with roles already replaced by their bound actions.
    pub formula: Formula,
}

pub fn parse_property_file(text: &str) -> Result<PropertyFile, FormulaError> {
    let mut bindings: Vec<(String, String)> = Vec::new();
    let mut body = String::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if body.trim().is_empty() && (trimmed.starts_with('%') || trimmed.starts_with('#')) {
            body.push('\n');
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("bind ").filter(|_| body.trim().is_empty()) {
            let (role, action) = rest.split_once('=').ok_or(FormulaError::Syntax {
                line: i + 1,
                column: 1,
                message: "expected `bind <role> = <action>`".into(),
            })?;
            let (role, action) = (role.trim().to_string(), action.trim().to_string());
            if bindings.iter().any(|(r, _)| *r == role) {
                return Err(FormulaError::DuplicateBinding(role));
            }
            bindings.push((role, action));
            body.push('\n');
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut formula = parse_formula(&body)?;
    let lookup = |a: &str| bindings.iter().find(|(r, _)| r == a).map(|(_, b)| b.clone());
    formula.rename_actions(&lookup);
    Ok(PropertyFile { bindings, formula })
}

/// Deadlock freedom.
pub const DEADLOCK_FREE: &str = include_str!("../../fixtures/props/deadlock_free.mcf");
/// No X-ray output without an outstanding request.
pub const NO_XRAY_WITHOUT_REQUEST: &str = include_str!("../../fixtures/props/no_xray_without_request.mcf");
/// An active start condition prevents a new X-ray request from starting.
pub const START_CONDITION_BLOCKS: &str = include_str!("../../fixtures/props/start_condition_blocks.mcf");
