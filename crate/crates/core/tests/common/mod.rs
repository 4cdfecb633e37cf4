//! Random models and LTSs, plus brute-force oracles, shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use pedal_core::dsl::{validate, GuardExpr, Literal, ModelAst, Rule, Stmt, ValidatedModel, OUTPUT_PLANE, OUTPUT_TYPE};
use pedal_core::equivalence::Counterexample;
use pedal_core::lts::{Label, Lts};
use pedal_core::semantics::{Plane, PState, XRay};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn plane(rng: &mut impl Rng) -> Plane {
    *Plane::ALL.choose(rng).unwrap()
}

pub fn xray(rng: &mut impl Rng) -> XRay {
    *XRay::ALL.choose(rng).unwrap()
}

fn guard(rng: &mut impl Rng, ast: &ModelAst, depth: u32) -> GuardExpr {
    let roll = if depth == 0 { rng.gen_range(0..4) } else { rng.gen_range(0..7) };
    match roll {
        0 if !ast.plane_vars.is_empty() => {
            let (v, _) = ast.plane_vars.choose(rng).unwrap();
            GuardExpr::Cmp(v.clone(), Literal::Plane(plane(rng)))
        }
        0 | 1 => {
            let (v, _) = ast.bool_vars.choose(rng).unwrap();
            GuardExpr::Cmp(v.clone(), Literal::Bool(rng.gen()))
        }
        2 => GuardExpr::Var(ast.bool_vars.choose(rng).unwrap().0.clone()),
        3 => match rng.gen_range(0..3) {
            0 => GuardExpr::Const(rng.gen()),
            1 => GuardExpr::Cmp(OUTPUT_TYPE.into(), Literal::XRay(xray(rng))),
            _ => GuardExpr::Cmp(OUTPUT_PLANE.into(), Literal::Plane(plane(rng))),
        },
        4 => GuardExpr::negate(guard(rng, ast, depth - 1)),
        5 => GuardExpr::and(guard(rng, ast, depth - 1), guard(rng, ast, depth - 1)),
        _ => GuardExpr::or(guard(rng, ast, depth - 1), guard(rng, ast, depth - 1)),
    }
}

fn assignment(rng: &mut impl Rng, ast: &ModelAst) -> Stmt {
    match rng.gen_range(0..4) {
        0 if !ast.plane_vars.is_empty() => {
            let (v, _) = ast.plane_vars.choose(rng).unwrap();
            Stmt::Assign(v.clone(), Literal::Plane(plane(rng)))
        }
        0 | 1 => {
            let (v, _) = ast.bool_vars.choose(rng).unwrap();
            Stmt::Assign(v.clone(), Literal::Bool(rng.gen()))
        }
        2 => Stmt::Assign(OUTPUT_TYPE.into(), Literal::XRay(xray(rng))),
        _ => Stmt::Assign(OUTPUT_PLANE.into(), Literal::Plane(plane(rng))),
    }
}

fn block(rng: &mut impl Rng, ast: &ModelAst, len: usize, nest: bool, p_if: f64) -> Vec<Stmt> {
    (0..len)
        .map(|_| {
            if nest && rng.gen_bool(p_if) {
                let n = rng.gen_range(0..=3);
                Stmt::IfThen(guard(rng, ast, 2), block(rng, ast, n, false, p_if))
            } else {
                assignment(rng, ast)
            }
        })
        .collect()
}

/// Declarations only, within the acceptance bounds (≤ 4 bool vars, ≤ 2 plane
/// vars, ≤ 6 rules).
pub fn declarations(rng: &mut impl Rng) -> ModelAst {
    let nb = rng.gen_range(1..=4);
    let np = rng.gen_range(0..=2);
    let na = rng.gen_range(1..=6);
    ModelAst {
        input_actions: (0..na).map(|i| format!("a{i}")).collect(),
        bool_vars: (0..nb).map(|i| (format!("b{i}"), rng.gen())).collect(),
        plane_vars: (0..np).map(|i| (format!("p{i}"), plane(rng))).collect(),
        rules: vec![],
    }
}

/// A random valid model. `p_if` is the chance that a top-level statement is
/// a conditional.
pub fn random_model_with(rng: &mut impl Rng, p_if: f64) -> ValidatedModel {
    let mut ast = declarations(rng);
    let mut actions = ast.input_actions.clone();
    actions.shuffle(rng);
    ast.rules = actions
        .into_iter()
        .map(|action| {
            let len = rng.gen_range(0..=4);
            Rule {
                action,
                guard: guard(rng, &ast, 2),
                do_clause: block(rng, &ast, len, true, p_if),
            }
        })
        .collect();
    validate(ast).expect("generated models are well-typed")
}

pub fn random_model(rng: &mut impl Rng) -> ValidatedModel {
    random_model_with(rng, 0.3)
}

/// An arbitrary valuation of the model's variables.
pub fn random_state(rng: &mut impl Rng, model: &ValidatedModel) -> PState {
    PState {
        bvals: model.bool_vars().iter().map(|(n, _)| (n.clone(), rng.gen())).collect(),
        pvals: model.plane_vars().iter().map(|(n, _)| (n.clone(), plane(rng))).collect(),
        out_type: xray(rng),
        out_plane: plane(rng),
    }
}

pub fn random_stmts(rng: &mut impl Rng, model: &ValidatedModel) -> Vec<Stmt> {
    let len = rng.gen_range(0..=5);
    block(rng, model.ast(), len, true, 0.4)
}

pub fn has_conditional(model: &ValidatedModel) -> bool {
    model
        .rules()
        .iter()
        .any(|r| r.do_clause.iter().any(|s| matches!(s, Stmt::IfThen(..))))
}

/// A random LTS over `labels` with 1..=max_states states.
pub fn random_lts(rng: &mut impl Rng, max_states: usize, labels: &[Label]) -> Lts {
    let n = rng.gen_range(1..=max_states);
    let mut lts = Lts::new(n, 0);
    let m = rng.gen_range(0..=2 * n);
    for _ in 0..m {
        let from = rng.gen_range(0..n);
        let to = rng.gen_range(0..n);
        lts.add_transition(from, labels.choose(rng).unwrap().clone(), to);
    }
    lts
}

/// A copy of `lts` with states renumbered and, optionally, one transition
/// routed through a fresh state by an inert tau step.
pub fn shuffled_copy(rng: &mut impl Rng, lts: &Lts, add_tau: bool) -> Lts {
    let n = lts.num_states();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut out = Lts::new(n, perm[lts.initial()]);
    let detour = if add_tau && lts.num_transitions() > 0 {
        Some(rng.gen_range(0..lts.num_transitions()))
    } else {
        None
    };
    for (i, t) in lts.transitions().iter().enumerate() {
        if Some(i) == detour {
            let mid = out.add_state();
            out.add_transition(perm[t.from], Label::Tau, mid);
            out.add_transition(mid, t.label.clone(), perm[t.to]);
            // The original source keeps its other behaviour.
            for u in lts.transitions().iter().filter(|u| u.from == t.from) {
                out.add_transition(mid, u.label.clone(), perm[u.to]);
            }
        } else {
            out.add_transition(perm[t.from], t.label.clone(), perm[t.to]);
        }
    }
    out
}

/// Disjoint union; states of `b` are shifted by `a.num_states()`.
fn union(a: &Lts, b: &Lts) -> (Vec<Vec<(Label, usize)>>, usize) {
    let off = a.num_states();
    let mut succ = vec![Vec::new(); off + b.num_states()];
    for t in a.transitions() {
        succ[t.from].push((t.label.clone(), t.to));
    }
    for t in b.transitions() {
        succ[off + t.from].push((t.label.clone(), off + t.to));
    }
    (succ, off)
}

fn tau_closure(succ: &[Vec<(Label, usize)>], s: usize) -> Vec<usize> {
    let mut seen = vec![s];
    let mut i = 0;
    while i < seen.len() {
        for (l, t) in &succ[seen[i]] {
            if l.is_tau() && !seen.contains(t) {
                seen.push(*t);
            }
        }
        i += 1;
    }
    seen
}

/// Greatest-fixpoint bisimulation relation computed by deleting violating
/// pairs until nothing changes.
pub fn brute_force_bisimilar(a: &Lts, b: &Lts, branching: bool) -> bool {
    let (succ, off) = union(a, b);
    let n = succ.len();
    let mut rel = vec![vec![true; n]; n];
    let closures: Vec<Vec<usize>> = (0..n).map(|s| tau_closure(&succ, s)).collect();
    let simulates = |rel: &Vec<Vec<bool>>, p: usize, q: usize| -> bool {
        succ[p].iter().all(|(l, p2)| {
            if branching {
                (l.is_tau() && rel[*p2][q])
                    || closures[q].iter().any(|&q1| {
                        rel[p][q1] && succ[q1].iter().any(|(m, q2)| m == l && rel[*p2][*q2])
                    })
            } else {
                succ[q].iter().any(|(m, q2)| m == l && rel[*p2][*q2])
            }
        })
    };
    loop {
        let mut changed = false;
        for p in 0..n {
            for q in 0..n {
                if rel[p][q] && !(simulates(&rel, p, q) && simulates(&rel, q, p)) {
                    rel[p][q] = false;
                    rel[q][p] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    rel[a.initial()][off + b.initial()]
}

/// States reachable from the initial state by exactly `trace`.
pub fn replay(lts: &Lts, trace: &[Label]) -> HashSet<usize> {
    let mut cur = HashSet::from([lts.initial()]);
    for l in trace {
        cur = lts
            .transitions()
            .iter()
            .filter(|t| cur.contains(&t.from) && t.label == *l)
            .map(|t| t.to)
            .collect();
    }
    cur
}

/// Checks a strong counterexample: both states are reached by the trace and
/// exactly the indicated one can do the label.
pub fn strong_counterexample_valid(a: &Lts, b: &Lts, c: &Counterexample) -> bool {
    let can = |lts: &Lts, s: usize| lts.transitions().iter().any(|t| t.from == s && t.label == c.label);
    replay(a, &c.trace).contains(&c.left_state)
        && replay(b, &c.trace).contains(&c.right_state)
        && can(a, c.left_state) == c.enabled_in_left
        && can(b, c.right_state) != c.enabled_in_left
}

/// Out-degree scan over reachable states.
pub fn deadlock_free_by_scan(lts: &Lts) -> bool {
    let reach = lts.reachable();
    let deg = lts.out_degree();
    (0..lts.num_states()).all(|s| !reach[s] || deg[s] > 0)
}

pub fn labels_abt() -> Vec<Label> {
    vec![Label::Input("a".into()), Label::Input("b".into()), Label::Tau]
}
