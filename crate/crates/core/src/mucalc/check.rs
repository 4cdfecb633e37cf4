use std::collections::{HashMap, HashSet, VecDeque};
use std::rc::Rc;

use thiserror::Error;

use super::{parser, ActForm, DataExpr, Fixpoint, Formula, FormulaError, Sort, Value};
use crate::lts::{Label, Lts};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("action `{0}` is not in the LTS action universe")]
    UnknownAction(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub holds: bool,
    /// States where the formula fails, ascending; empty when it holds.
    pub witness_states: Vec<usize>,
    /// When the initial state fails: a shortest label sequence from it to a
    /// state where an atomic part of the formula is violated.
    pub witness_trace: Option<Vec<Label>>,
    /// The largest number of rounds any single fixpoint needed.
    pub iterations: usize,
}

type Data = Vec<(String, Value)>;
type Set = Vec<bool>;

#[derive(Clone)]
struct Frame<'a> {
    fp: &'a Fixpoint,
    /// Length of the data environment where the fixpoint is defined.
    data_len: usize,
    sets: Rc<Vec<Set>>,
}

#[derive(Clone, Default)]
struct Env<'a> {
    data: Data,
    fix: Vec<Frame<'a>>,
}

fn lookup<'d>(data: &'d Data, name: &str) -> Option<&'d Value> {
    data.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
}

fn eval_data(e: &DataExpr, data: &Data) -> Value {
    let b = |e: &DataExpr| matches!(eval_data(e, data), Value::Bool(true));
    match e {
        DataExpr::Lit(v) => *v,
        DataExpr::Var(n) => *lookup(data, n).expect("data variables are checked before evaluation"),
        DataExpr::Eq(a, c) => Value::Bool(eval_data(a, data) == eval_data(c, data)),
        DataExpr::Not(a) => Value::Bool(!b(a)),
        DataExpr::And(a, c) => Value::Bool(b(a) && b(c)),
        DataExpr::Or(a, c) => Value::Bool(b(a) || b(c)),
    }
}

fn truthy(e: &DataExpr, data: &Data) -> bool {
    eval_data(e, data) == Value::Bool(true)
}

fn valuations(vars: &[(String, Sort)]) -> Vec<Data> {
    let mut out = vec![Vec::new()];
    for (name, sort) in vars {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                Value::domain(*sort).into_iter().map(move |v| {
                    let mut d = prefix.clone();
                    d.push((name.clone(), v));
                    d
                })
            })
            .collect();
    }
    out
}

fn match_component(e: &DataExpr, actual: Value, data: &Data, binds: &mut Data) -> bool {
    match e {
        DataExpr::Var(n) if lookup(data, n).is_none() => match lookup(binds, n) {
            Some(v) => *v == actual,
            None => {
                binds.push((n.clone(), actual));
                true
            }
        },
        _ => eval_data(e, data) == actual,
    }
}

/// Whether `label` is in the set denoted by `act`; on a match, returns the
/// values bound by output patterns.
fn act_match(act: &ActForm, label: &Label, data: &Data) -> Option<Data> {
    match act {
        ActForm::True => Some(vec![]),
        ActForm::False => None,
        ActForm::Action(a) => matches!(label, Label::Input(b) if a == b).then(Vec::new),
        ActForm::Tau => label.is_tau().then(Vec::new),
        ActForm::Output(x, p) => {
            let Label::Output(xv, pv) = label else { return None };
            let mut binds = Vec::new();
            (match_component(x, Value::XRay(*xv), data, &mut binds)
                && match_component(p, Value::Plane(*pv), data, &mut binds))
            .then_some(binds)
        }
        ActForm::Not(a) => act_match(a, label, data).is_none().then(Vec::new),
        ActForm::And(a, b) => {
            let mut l = act_match(a, label, data)?;
            for (n, v) in act_match(b, label, data)? {
                match lookup(&l, &n) {
                    Some(w) if *w != v => return None,
                    Some(_) => {}
                    None => l.push((n, v)),
                }
            }
            Some(l)
        }
        ActForm::Or(a, b) => (act_match(a, label, data).is_some() || act_match(b, label, data).is_some()).then(Vec::new),
        ActForm::Forall(vars, a) => {
            let mut bound = None;
            for val in valuations(vars) {
                let mut d = data.clone();
                d.extend(val);
                let b = act_match(a, label, &d)?;
                bound.get_or_insert(b);
            }
            Some(
                bound
                    .unwrap_or_default()
                    .into_iter()
                    .filter(|(n, _)| !vars.iter().any(|(v, _)| v == n))
                    .collect(),
            )
        }
    }
}

/// Whether a label matches a closed action formula.
pub fn matches(act: &ActForm, label: &Label) -> bool {
    act_match(act, label, &Vec::new()).is_some()
}

struct Checker<'a> {
    n: usize,
    succ: Vec<Vec<(&'a Label, usize)>>,
    iterations: usize,
    memo: HashMap<(usize, Data), Rc<Set>>,
}

impl<'a> Checker<'a> {
    fn new(lts: &'a Lts) -> Self {
        Checker {
            n: lts.num_states(),
            succ: lts.successors(),
            iterations: 0,
            memo: HashMap::new(),
        }
    }

    fn solve(&mut self, fp: &'a Fixpoint, greatest: bool, env: &mut Env<'a>) -> Vec<Set> {
        let k = fp.params.len();
        let mut sets = vec![vec![greatest; self.n]; 1 << k];
        let mut rounds = 0;
        loop {
            rounds += 1;
            env.fix.push(Frame {
                fp,
                data_len: env.data.len(),
                sets: Rc::new(sets.clone()),
            });
            let mut next = Vec::with_capacity(sets.len());
            for bits in 0..1usize << k {
                for (i, (name, _)) in fp.params.iter().enumerate() {
                    env.data.push((name.clone(), Value::Bool(bits >> i & 1 == 1)));
                }
                next.push(self.eval(&fp.body, env));
                env.data.truncate(env.data.len() - k);
            }
            env.fix.pop();
            if next == sets {
                break;
            }
            sets = next;
        }
        self.iterations = self.iterations.max(rounds);
        sets
    }

    fn initial_bits(fp: &Fixpoint) -> usize {
        fp.params
            .iter()
            .enumerate()
            .fold(0, |acc, (i, (_, init))| acc | (usize::from(*init) << i))
    }

    /// Transitions matching `act`, grouped by the values their patterns bind.
    fn matching(&self, act: &ActForm, data: &Data) -> (Vec<Data>, Vec<(usize, usize, usize)>) {
        let mut keys: Vec<Data> = Vec::new();
        let mut edges = Vec::new();
        for (s, out) in self.succ.iter().enumerate() {
            for (label, t) in out {
                if let Some(b) = act_match(act, label, data) {
                    let k = keys.iter().position(|x| *x == b).unwrap_or_else(|| {
                        keys.push(b);
                        keys.len() - 1
                    });
                    edges.push((s, *t, k));
                }
            }
        }
        (keys, edges)
    }

    fn eval(&mut self, f: &'a Formula, env: &mut Env<'a>) -> Set {
        let n = self.n;
        match f {
            Formula::True => vec![true; n],
            Formula::False => vec![false; n],
            Formula::Data(e) => vec![truthy(e, &env.data); n],
            Formula::Not(g) => self.eval(g, env).into_iter().map(|b| !b).collect(),
            Formula::And(a, b) => {
                let l = self.eval(a, env);
                let r = self.eval(b, env);
                l.into_iter().zip(r).map(|(x, y)| x && y).collect()
            }
            Formula::Or(a, b) => {
                let l = self.eval(a, env);
                let r = self.eval(b, env);
                l.into_iter().zip(r).map(|(x, y)| x || y).collect()
            }
            Formula::Implies(a, b) => {
                let l = self.eval(a, env);
                let r = self.eval(b, env);
                l.into_iter().zip(r).map(|(x, y)| !x || y).collect()
            }
            Formula::Box(act, g) | Formula::Diamond(act, g) => {
                let is_box = matches!(f, Formula::Box(..));
                let (keys, edges) = self.matching(act, &env.data);
                let mut bodies = Vec::with_capacity(keys.len());
                for k in keys {
                    let len = env.data.len();
                    env.data.extend(k);
                    bodies.push(self.eval(g, env));
                    env.data.truncate(len);
                }
                let mut out = vec![is_box; n];
                for (s, t, k) in edges {
                    if bodies[k][t] != is_box {
                        out[s] = !is_box;
                    }
                }
                out
            }
            Formula::BoxStar(act, g) => {
                let mut z = self.eval(g, env);
                let (_, edges) = self.matching(act, &env.data);
                let mut preds = vec![Vec::new(); n];
                for (s, t, _) in edges {
                    preds[t].push(s);
                }
                let mut queue: Vec<usize> = (0..n).filter(|&s| !z[s]).collect();
                while let Some(t) = queue.pop() {
                    for &s in &preds[t] {
                        if z[s] {
                            z[s] = false;
                            queue.push(s);
                        }
                    }
                }
                z
            }
            Formula::Nu(fp) | Formula::Mu(fp) => {
                let sets = self.solve(fp, matches!(f, Formula::Nu(_)), env);
                sets[Self::initial_bits(fp)].clone()
            }
            Formula::VarApp(v, args) => {
                let frame = env
                    .fix
                    .iter()
                    .rev()
                    .find(|fr| fr.fp.var == *v)
                    .expect("fixpoint variables are checked before evaluation");
                let bits = args
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (i, a)| acc | (usize::from(truthy(a, &env.data)) << i));
                frame.sets[bits].clone()
            }
            Formula::Forall(vars, g) | Formula::Exists(vars, g) => {
                let all = matches!(f, Formula::Forall(..));
                let mut out = vec![all; n];
                for val in valuations(vars) {
                    let len = env.data.len();
                    env.data.extend(val);
                    let r = self.eval(g, env);
                    env.data.truncate(len);
                    for (o, x) in out.iter_mut().zip(r) {
                        *o = if all { *o && x } else { *o || x };
                    }
                }
                out
            }
        }
    }

    /// Truth of `f` under an environment whose fixpoint frames hold final
    /// solutions; such frames are determined by the data environment.
    fn holds_at(&mut self, f: &'a Formula, env: &Env<'a>, s: usize) -> bool {
        let key = (f as *const Formula as usize, env.data.clone());
        if let Some(r) = self.memo.get(&key) {
            return r[s];
        }
        let r = Rc::new(self.eval(f, &mut env.clone()));
        self.memo.insert(key, r.clone());
        r[s]
    }

    /// Shortest path through the failure explanation of `f` at `start`:
    /// modal steps cost a label, everything else is free.
    fn witness(&mut self, f: &'a Formula, start: usize) -> Option<Vec<Label>> {
        struct Node<'a> {
            state: usize,
            f: &'a Formula,
            env: Env<'a>,
            parent: Option<(usize, Option<Label>)>,
        }
        let mut nodes = vec![Node {
            state: start,
            f,
            env: Env::default(),
            parent: None,
        }];
        let mut seen: HashSet<(usize, usize, Data)> = HashSet::new();
        let mut deque = VecDeque::from([0usize]);
        while let Some(id) = deque.pop_front() {
            let (state, f, env) = (nodes[id].state, nodes[id].f, nodes[id].env.clone());
            if !seen.insert((state, f as *const Formula as usize, env.data.clone())) {
                continue;
            }
            let mut next: Vec<(usize, &'a Formula, Env<'a>, Option<Label>)> = Vec::new();
            match f {
                Formula::And(a, b) => {
                    for g in [a, b] {
                        if !self.holds_at(g, &env, state) {
                            next.push((state, g, env.clone(), None));
                        }
                    }
                }
                Formula::Implies(_, b) => next.push((state, b, env.clone(), None)),
                Formula::Box(act, g) => {
                    let succ = self.succ[state].clone();
                    for (label, t) in succ {
                        if let Some(b) = act_match(act, label, &env.data) {
                            let mut e = env.clone();
                            e.data.extend(b);
                            if !self.holds_at(g, &e, t) {
                                next.push((t, g, e, Some(label.clone())));
                            }
                        }
                    }
                }
                Formula::BoxStar(act, g) => {
                    if !self.holds_at(g, &env, state) {
                        next.push((state, g, env.clone(), None));
                    }
                    let succ = self.succ[state].clone();
                    for (label, t) in succ {
                        if act_match(act, label, &env.data).is_some() && !self.holds_at(f, &env, t) {
                            next.push((t, f, env.clone(), Some(label.clone())));
                        }
                    }
                }
                Formula::Nu(fp) => {
                    let mut e = env.clone();
                    let sets = self.solve(fp, true, &mut e);
                    e.fix.push(Frame {
                        fp,
                        data_len: e.data.len(),
                        sets: Rc::new(sets),
                    });
                    for (name, init) in &fp.params {
                        e.data.push((name.clone(), Value::Bool(*init)));
                    }
                    next.push((state, &fp.body, e, None));
                }
                Formula::VarApp(v, args) => {
                    let idx = env.fix.iter().rposition(|fr| fr.fp.var == *v)?;
                    let frame = env.fix[idx].clone();
                    let vals: Vec<bool> = args.iter().map(|a| truthy(a, &env.data)).collect();
                    let mut e = Env {
                        data: env.data[..frame.data_len].to_vec(),
                        fix: env.fix[..=idx].to_vec(),
                    };
                    for ((name, _), v) in frame.fp.params.iter().zip(vals) {
                        e.data.push((name.clone(), Value::Bool(v)));
                    }
                    next.push((state, &frame.fp.body, e, None));
                }
                Formula::Forall(vars, g) => {
                    for val in valuations(vars) {
                        let mut e = env.clone();
                        e.data.extend(val);
                        if !self.holds_at(g, &e, state) {
                            next.push((state, g, e, None));
                        }
                    }
                }
                _ => {
                    let mut trace = Vec::new();
                    let mut cur = id;
                    while let Some((p, label)) = nodes[cur].parent.clone() {
                        trace.extend(label);
                        cur = p;
                    }
                    trace.reverse();
                    return Some(trace);
                }
            }
            for (state, g, env, label) in next {
                let weighted = label.is_some();
                nodes.push(Node {
                    state,
                    f: g,
                    env,
                    parent: Some((id, label)),
                });
                if weighted {
                    deque.push_back(nodes.len() - 1);
                } else {
                    deque.push_front(nodes.len() - 1);
                }
            }
        }
        None
    }
}

fn check_actions(lts: &Lts, f: &Formula) -> Result<(), CheckError> {
    let universe = lts.action_universe();
    match f.action_names().into_iter().find(|a| !universe.contains(a)) {
        Some(a) => Err(CheckError::UnknownAction(a)),
        None => Ok(()),
    }
}

/// The set of states satisfying `f`.
pub fn satisfying_states(lts: &Lts, f: &Formula) -> Result<Vec<bool>, CheckError> {
    parser::validate(f)?;
    check_actions(lts, f)?;
    Ok(Checker::new(lts).eval(f, &mut Env::default()))
}

pub fn check(lts: &Lts, f: &Formula) -> Result<CheckResult, CheckError> {
    parser::validate(f)?;
    check_actions(lts, f)?;
    let mut c = Checker::new(lts);
    let sat = c.eval(f, &mut Env::default());
    let iterations = c.iterations;
    let holds = sat[lts.initial()];
    // Parameterized formulas may fail at states reached only under other
    // parameter values, so the set is reported only for a failing check.
    let witness_states = if holds { vec![] } else { (0..sat.len()).filter(|&s| !sat[s]).collect() };
    let witness_trace = if holds { None } else { c.witness(f, lts.initial()) };
    Ok(CheckResult {
        holds,
        witness_states,
        witness_trace,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl;
    use crate::mucalc::{parse_formula, parse_property_file, DEADLOCK_FREE, NO_XRAY_WITHOUT_REQUEST, START_CONDITION_BLOCKS};
    use crate::semantics::{build_lts, Mode, Plane, XRay};

    fn fixture_lts() -> Lts {
        build_lts(&dsl::fixture(), Mode::Reference).unwrap()
    }

    fn prop(text: &str) -> Formula {
        parse_property_file(text).unwrap().formula
    }

    #[test]
    fn appendix_properties_hold_on_fixture() {
        let lts = fixture_lts();
        for p in [DEADLOCK_FREE, NO_XRAY_WITHOUT_REQUEST, START_CONDITION_BLOCKS] {
            let r = check(&lts, &prop(p)).unwrap();
            assert!(r.holds, "{p}: fails at {:?}", r.witness_states);
            assert!(r.witness_states.is_empty());
            assert!(r.witness_trace.is_none());
        }
    }

    #[test]
    fn start_condition_fails_on_unconditional_mutant() {
        let model = dsl::load(dsl::FIXTURE_UNCONDITIONAL_SOURCE).unwrap();
        let lts = build_lts(&model, Mode::Reference).unwrap();
        let r = check(&lts, &prop(START_CONDITION_BLOCKS)).unwrap();
        assert!(!r.holds);
        assert!(r.witness_states.contains(&lts.initial()));
        assert_eq!(
            r.witness_trace.unwrap(),
            vec![
                Label::Input("StartCond".into()),
                Label::Output(XRay::Standby, Plane::None),
                Label::Input("FRFluoOn".into()),
                Label::Output(XRay::Fluo, Plane::FR),
            ]
        );
    }

    #[test]
    fn unknown_action_rejected() {
        let f = parse_formula("[Pedal]false").unwrap();
        assert_eq!(check(&fixture_lts(), &f), Err(CheckError::UnknownAction("Pedal".into())));
    }

    #[test]
    fn diamond_and_mu_on_counter() {
        let lts = crate::lts::counter();
        let f = parse_formula("mu X. (<reset>true || <true>X)").unwrap();
        assert!(check(&lts, &f).unwrap().holds);
        let g = parse_formula("<reset>true").unwrap();
        let r = check(&lts, &g).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness_trace, Some(vec![]));
        assert_eq!(r.witness_states.len(), 3);
    }

    #[test]
    fn iteration_bound_respected() {
        let lts = fixture_lts();
        let r = check(&lts, &prop(START_CONDITION_BLOCKS)).unwrap();
        assert!(r.iterations >= 1);
        assert!(r.iterations <= lts.num_states() * 4 + 1);
    }

    #[test]
    fn complement_matches_exactly_the_rest() {
        let labels = [
            Label::Tau,
            Label::Input("a".into()),
            Label::Input("b".into()),
            Label::Output(XRay::Fluo, Plane::FR),
            Label::Output(XRay::Standby, Plane::None),
        ];
        for src in ["[a]true", "[output(Fluo, FR)]true", "[forall x:XRay, p:Plane . !(output(x, p))]true", "[tau && !(a)]true"] {
            let Formula::Box(act, _) = parse_formula(src).unwrap() else { panic!() };
            let neg = ActForm::Not(Box::new(act.clone()));
            for l in &labels {
                assert_ne!(matches(&act, l), matches(&neg, l), "{src} on {l}");
            }
        }
    }
}
