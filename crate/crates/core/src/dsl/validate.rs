use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::ast::{GuardExpr, Literal, ModelAst, Rule, Stmt, VarKind, OUTPUT_PLANE, OUTPUT_TYPE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("no rule for input action `{0}`")]
    MissingRule(String),
    #[error("more than one rule for input action `{0}`")]
    DuplicateRule(String),
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("rule refers to undeclared input action `{0}`")]
    UnknownAction(String),
    #[error("`{0}` is declared more than once")]
    DuplicateDeclaration(String),
}

/// A model that passed every static check. Only [`validate`] constructs one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedModel {
    ast: ModelAst,
    /// `rule_of[i]` is the index in `ast.rules` of the rule for action `i`.
    rule_of: Vec<usize>,
    kinds: HashMap<String, VarKind>,
}

impl ValidatedModel {
    pub fn ast(&self) -> &ModelAst {
        &self.ast
    }

    pub fn into_ast(self) -> ModelAst {
        self.ast
    }

    /// Input actions in declaration order.
    pub fn actions(&self) -> &[String] {
        &self.ast.input_actions
    }

    pub fn bool_vars(&self) -> &[(String, bool)] {
        &self.ast.bool_vars
    }

    pub fn plane_vars(&self) -> &[(String, crate::semantics::Plane)] {
        &self.ast.plane_vars
    }

    /// Rules in source order.
    pub fn rules(&self) -> &[Rule] {
        &self.ast.rules
    }

    /// The rule of the `i`-th declared action.
    pub fn rule_at(&self, action_index: usize) -> &Rule {
        &self.ast.rules[self.rule_of[action_index]]
    }

    pub fn action_index(&self, action: &str) -> Option<usize> {
        self.ast.input_actions.iter().position(|a| a == action)
    }

    pub fn rule(&self, action: &str) -> Option<&Rule> {
        self.action_index(action).map(|i| self.rule_at(i))
    }

    /// Type of a declared or implicit variable.
    pub fn var_kind(&self, name: &str) -> Option<VarKind> {
        self.kinds.get(name).copied()
    }

    /// Rebuilds the model with one rule replaced; used by fault injection.
    pub fn with_rule(&self, action: &str, rule: Rule) -> Result<ValidatedModel, ValidationError> {
        let mut ast = self.ast.clone();
        let idx = self
            .action_index(action)
            .ok_or_else(|| ValidationError::UnknownAction(action.to_string()))?;
        ast.rules[self.rule_of[idx]] = rule;
        validate(ast)
    }
}

struct Checker<'a> {
    kinds: &'a HashMap<String, VarKind>,
    action: &'a str,
}

impl Checker<'_> {
    fn kind_of(&self, name: &str) -> Result<VarKind, ValidationError> {
        self.kinds
            .get(name)
            .copied()
            .ok_or_else(|| ValidationError::UndeclaredVariable(name.to_string()))
    }

    fn guard(&self, g: &GuardExpr) -> Result<(), ValidationError> {
        match g {
            GuardExpr::Const(_) => Ok(()),
            GuardExpr::Var(v) => match self.kind_of(v)? {
                VarKind::Bool => Ok(()),
                k => Err(ValidationError::TypeMismatch(format!(
                    "rule {}: `{v}` is a {k} variable used as a condition",
                    self.action
                ))),
            },
            GuardExpr::Cmp(v, lit) => self.same_kind(v, *lit, "=="),
            GuardExpr::Not(e) => self.guard(e),
            GuardExpr::And(a, b) | GuardExpr::Or(a, b) => {
                self.guard(a)?;
                self.guard(b)
            }
        }
    }

    fn same_kind(&self, v: &str, lit: Literal, op: &str) -> Result<(), ValidationError> {
        let k = self.kind_of(v)?;
        if k == lit.kind() {
            Ok(())
        } else {
            Err(ValidationError::TypeMismatch(format!(
                "rule {}: `{v} {op} {lit}` ({k} variable, {} value)",
                self.action,
                lit.kind()
            )))
        }
    }

    fn stmts(&self, body: &[Stmt]) -> Result<(), ValidationError> {
        for s in body {
            match s {
                Stmt::Assign(v, lit) => self.same_kind(v, *lit, ":=")?,
                Stmt::IfThen(c, then) => {
                    self.guard(c)?;
                    self.stmts(then)?;
                }
            }
        }
        Ok(())
    }
}

/// Checks the static rules of the language and returns a model the
/// evaluators can run without further checks.
pub fn validate(ast: ModelAst) -> Result<ValidatedModel, ValidationError> {
    let mut seen = HashSet::new();
    for a in &ast.input_actions {
        if !seen.insert(a.as_str()) {
            return Err(ValidationError::DuplicateDeclaration(a.clone()));
        }
    }

    let mut kinds = HashMap::new();
    kinds.insert(OUTPUT_TYPE.to_string(), VarKind::XRay);
    kinds.insert(OUTPUT_PLANE.to_string(), VarKind::Plane);
    let declared = ast
        .bool_vars
        .iter()
        .map(|(n, _)| (n, VarKind::Bool))
        .chain(ast.plane_vars.iter().map(|(n, _)| (n, VarKind::Plane)));
    for (name, kind) in declared {
        if kinds.insert(name.clone(), kind).is_some() {
            return Err(ValidationError::DuplicateDeclaration(name.clone()));
        }
    }

    let mut rule_of: Vec<Option<usize>> = vec![None; ast.input_actions.len()];
    for (ri, rule) in ast.rules.iter().enumerate() {
        let ai = ast
            .input_actions
            .iter()
            .position(|a| *a == rule.action)
            .ok_or_else(|| ValidationError::UnknownAction(rule.action.clone()))?;
        if rule_of[ai].replace(ri).is_some() {
            return Err(ValidationError::DuplicateRule(rule.action.clone()));
        }
    }
    let rule_of = rule_of
        .into_iter()
        .enumerate()
        .map(|(ai, r)| r.ok_or_else(|| ValidationError::MissingRule(ast.input_actions[ai].clone())))
        .collect::<Result<Vec<_>, _>>()?;

    for rule in &ast.rules {
        let checker = Checker {
            kinds: &kinds,
            action: &rule.action,
        };
        checker.guard(&rule.guard)?;
        checker.stmts(&rule.do_clause)?;
    }

    Ok(ValidatedModel { ast, rule_of, kinds })
}
