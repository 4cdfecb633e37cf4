use std::fmt;

use crate::semantics::{Plane, XRay};

/// Name of the implicit output-type variable.
pub const OUTPUT_TYPE: &str = "OutputType";
/// Name of the implicit output-plane variable.
pub const OUTPUT_PLANE: &str = "OutputPlane";

/// A literal value appearing on the right of `==` or `:=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Literal {
    Bool(bool),
    Plane(Plane),
    XRay(XRay),
}

impl Literal {
    pub fn kind(self) -> VarKind {
        match self {
            Literal::Bool(_) => VarKind::Bool,
            Literal::Plane(_) => VarKind::Plane,
            Literal::XRay(_) => VarKind::XRay,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Plane(p) => write!(f, "{p}"),
            Literal::XRay(x) => write!(f, "{x}"),
        }
    }
}

/// Type of a variable (declared or implicit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Bool,
    Plane,
    XRay,
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarKind::Bool => "Boolean",
            VarKind::Plane => "Plane",
            VarKind::XRay => "XRay",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GuardExpr {
    Const(bool),
    /// A bare identifier used as a boolean.
    Var(String),
    /// `id == literal`
    Cmp(String, Literal),
    Not(Box<GuardExpr>),
    And(Box<GuardExpr>, Box<GuardExpr>),
    Or(Box<GuardExpr>, Box<GuardExpr>),
}

impl GuardExpr {
    pub fn negate(e: GuardExpr) -> Self {
        GuardExpr::Not(Box::new(e))
    }

    pub fn and(a: GuardExpr, b: GuardExpr) -> Self {
        GuardExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: GuardExpr, b: GuardExpr) -> Self {
        GuardExpr::Or(Box::new(a), Box::new(b))
    }

    /// Calls `f` for every variable name the expression reads.
    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            GuardExpr::Const(_) => {}
            GuardExpr::Var(v) | GuardExpr::Cmp(v, _) => f(v),
            GuardExpr::Not(e) => e.visit_vars(f),
            GuardExpr::And(a, b) | GuardExpr::Or(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Assign(String, Literal),
    IfThen(GuardExpr, Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub action: String,
    pub guard: GuardExpr,
    pub do_clause: Vec<Stmt>,
}

/// Syntax tree of a `.ped` file, exactly as written.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelAst {
    pub input_actions: Vec<String>,
    pub bool_vars: Vec<(String, bool)>,
    pub plane_vars: Vec<(String, Plane)>,
    pub rules: Vec<Rule>,
}
