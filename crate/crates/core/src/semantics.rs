//! Reference semantics: controller states, guard and do-clause evaluation,
//! and LTS construction with alternating input and output phases.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dsl::{GuardExpr, Literal, Stmt, ValidatedModel, OUTPUT_PLANE, OUTPUT_TYPE};
use crate::lts::{Label, Lts};

/// Default cap on the number of LTS states a builder may create.
pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

macro_rules! finite_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: [$name; [$(stringify!($variant)),+].len()] = [$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownValue;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $(stringify!($variant) => Ok($name::$variant),)+
                    _ => Err(UnknownValue(s.to_string())),
                }
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown value `{0}`")]
pub struct UnknownValue(pub String);

finite_enum!(
    /// Imaging plane an X-ray request is sent to.
    Plane { None, FR, LT, BI }
);

finite_enum!(
    /// Kind of X-ray requested.
    XRay { Standby, Fluo, SingleShot, Series }
);

/// Controller state: total valuations of the declared variables plus the two
/// output variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PState {
    pub bvals: BTreeMap<String, bool>,
    pub pvals: BTreeMap<String, Plane>,
    pub out_type: XRay,
    pub out_plane: Plane,
}

impl PState {
    /// Value of a declared or implicit variable.
    pub fn read(&self, name: &str) -> Option<Literal> {
        match name {
            OUTPUT_TYPE => Some(Literal::XRay(self.out_type)),
            OUTPUT_PLANE => Some(Literal::Plane(self.out_plane)),
            _ => self
                .bvals
                .get(name)
                .map(|b| Literal::Bool(*b))
                .or_else(|| self.pvals.get(name).map(|p| Literal::Plane(*p))),
        }
    }

    /// Function update `s[name -> value]`.
    pub fn assign(&mut self, name: &str, value: Literal) {
        match (name, value) {
            (OUTPUT_TYPE, Literal::XRay(x)) => self.out_type = x,
            (OUTPUT_PLANE, Literal::Plane(p)) => self.out_plane = p,
            (_, Literal::Bool(b)) => {
                if let Some(slot) = self.bvals.get_mut(name) {
                    *slot = b;
                }
            }
            (_, Literal::Plane(p)) => {
                if let Some(slot) = self.pvals.get_mut(name) {
                    *slot = p;
                }
            }
            (_, Literal::XRay(_)) => {}
        }
    }

    /// `name=value` pairs in the model's declaration order, outputs last.
    pub fn describe(&self, model: &ValidatedModel) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = model
            .bool_vars()
            .iter()
            .map(|(n, _)| (n.clone(), self.bvals[n].to_string()))
            .collect();
        out.extend(
            model
                .plane_vars()
                .iter()
                .map(|(n, _)| (n.clone(), self.pvals[n].to_string())),
        );
        out.push((OUTPUT_TYPE.into(), self.out_type.to_string()));
        out.push((OUTPUT_PLANE.into(), self.out_plane.to_string()));
        out
    }

    pub fn output(&self) -> Label {
        Label::Output(self.out_type, self.out_plane)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("action `{0}` is not enabled")]
    ActionNotEnabled(String),
    #[error("state space exceeds the limit of {0} states")]
    StateSpaceLimitExceeded(usize),
}

/// How conditionals inside do clauses are observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Do clauses execute atomically.
    Reference,
    /// Every conditional costs one internal step, as in the simulation back end.
    TauConditional,
}

pub fn initial_state(model: &ValidatedModel) -> PState {
    PState {
        bvals: model.bool_vars().iter().cloned().collect(),
        pvals: model.plane_vars().iter().cloned().collect(),
        out_type: XRay::Standby,
        out_plane: Plane::None,
    }
}

pub fn eval_guard(g: &GuardExpr, s: &PState) -> bool {
    match g {
        GuardExpr::Const(b) => *b,
        GuardExpr::Var(v) => s.read(v) == Some(Literal::Bool(true)),
        GuardExpr::Cmp(v, lit) => s.read(v) == Some(*lit),
        GuardExpr::Not(e) => !eval_guard(e, s),
        GuardExpr::And(a, b) => eval_guard(a, s) && eval_guard(b, s),
        GuardExpr::Or(a, b) => eval_guard(a, s) || eval_guard(b, s),
    }
}

/// Applies statements left to right; each assignment is visible to the
/// statements after it.
pub fn eval_stmts(body: &[Stmt], s: &PState) -> PState {
    let mut cur = s.clone();
    exec(body, &mut cur);
    cur
}

fn exec(body: &[Stmt], s: &mut PState) {
    for stmt in body {
        match stmt {
            Stmt::Assign(v, lit) => s.assign(v, *lit),
            Stmt::IfThen(c, then) => {
                if eval_guard(c, s) {
                    exec(then, s);
                }
            }
        }
    }
}

/// Actions whose guard holds in `s`, in declaration order.
pub fn enabled_inputs<'m>(model: &'m ValidatedModel, s: &PState) -> Vec<&'m str> {
    model
        .actions()
        .iter()
        .enumerate()
        .filter(|(i, _)| eval_guard(&model.rule_at(*i).guard, s))
        .map(|(_, a)| a.as_str())
        .collect()
}

pub fn step_input(model: &ValidatedModel, s: &PState, action: &str) -> Result<PState, SemanticsError> {
    match model.rule(action) {
        Some(rule) if eval_guard(&rule.guard, s) => Ok(eval_stmts(&rule.do_clause, s)),
        _ => Err(SemanticsError::ActionNotEnabled(action.to_string())),
    }
}

/// LTS configuration. `Pending` is a do clause suspended in front of a
/// conditional; the stack holds the remaining statements of each enclosing
/// block, innermost last.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Config {
    In(PState),
    Out(PState),
    Pending(Vec<Vec<Stmt>>, PState),
}

/// Runs assignments until the do clause finishes or reaches a conditional.
fn advance(mut stack: Vec<Vec<Stmt>>, mut s: PState) -> Config {
    while let Some(top) = stack.last_mut() {
        if top.is_empty() {
            stack.pop();
            continue;
        }
        match &top[0] {
            Stmt::Assign(v, lit) => {
                let (v, lit) = (v.clone(), *lit);
                top.remove(0);
                s.assign(&v, lit);
            }
            Stmt::IfThen(..) => return Config::Pending(stack, s),
        }
    }
    Config::Out(s)
}

/// Resolves the conditional at the head of a pending configuration.
fn resolve(mut stack: Vec<Vec<Stmt>>, s: PState) -> Config {
    let top = stack.last_mut().expect("pending configuration has a frame");
    let Stmt::IfThen(cond, then) = top.remove(0) else {
        unreachable!("pending configuration starts with a conditional")
    };
    if eval_guard(&cond, &s) {
        stack.push(then);
    }
    advance(stack, s)
}

pub fn build_lts(model: &ValidatedModel, mode: Mode) -> Result<Lts, SemanticsError> {
    build_lts_with_limit(model, mode, DEFAULT_STATE_LIMIT)
}

/// Breadth-first exploration from `(In, initial_state)`. States are numbered
/// in discovery order and deduplicated structurally.
pub fn build_lts_with_limit(model: &ValidatedModel, mode: Mode, limit: usize) -> Result<Lts, SemanticsError> {
    let start = Config::In(initial_state(model));
    let mut index: HashMap<Config, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    index.insert(start.clone(), 0);
    queue.push_back(start);
    let mut edges: Vec<(usize, Label, usize)> = Vec::new();

    let intern = |c: Config, index: &mut HashMap<Config, usize>, queue: &mut VecDeque<Config>| {
        if let Some(&i) = index.get(&c) {
            return Ok(i);
        }
        if index.len() >= limit {
            return Err(SemanticsError::StateSpaceLimitExceeded(limit));
        }
        let i = index.len();
        index.insert(c.clone(), i);
        queue.push_back(c);
        Ok(i)
    };

    while let Some(cfg) = queue.pop_front() {
        let from = index[&cfg];
        match cfg {
            Config::In(s) => {
                for (ai, action) in model.actions().iter().enumerate() {
                    let rule = model.rule_at(ai);
                    if !eval_guard(&rule.guard, &s) {
                        continue;
                    }
                    let next = match mode {
                        Mode::Reference => Config::Out(eval_stmts(&rule.do_clause, &s)),
                        Mode::TauConditional => advance(vec![rule.do_clause.clone()], s.clone()),
                    };
                    let to = intern(next, &mut index, &mut queue)?;
                    edges.push((from, Label::Input(action.clone()), to));
                }
            }
            Config::Out(s) => {
                let label = s.output();
                let to = intern(Config::In(s), &mut index, &mut queue)?;
                edges.push((from, label, to));
            }
            Config::Pending(stack, s) => {
                let to = intern(resolve(stack, s), &mut index, &mut queue)?;
                edges.push((from, Label::Tau, to));
            }
        }
    }

    let mut lts = Lts::new(index.len(), 0).with_actions(model.actions().to_vec());
    for (f, l, t) in edges {
        lts.add_transition(f, l, t);
    }
    Ok(lts)
}
