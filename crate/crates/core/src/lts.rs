//! Explicit labeled transition systems and the Aldebaran (`.aut`) format.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::semantics::{Plane, XRay};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Input(String),
    Output(XRay, Plane),
    Tau,
}

impl Label {
    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }

    /// Parses the `.aut` rendering of a label.
    pub fn parse(text: &str) -> Label {
        if text == "tau" {
            return Label::Tau;
        }
        if let Some(args) = text.strip_prefix("output(").and_then(|r| r.strip_suffix(')')) {
            if let Some((x, p)) = args.split_once(',') {
                if let (Ok(x), Ok(p)) = (x.parse(), p.parse()) {
                    return Label::Output(x, p);
                }
            }
        }
        Label::Input(text.to_string())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Input(a) => f.write_str(a),
            Label::Output(x, p) => write!(f, "output({x},{p})"),
            Label::Tau => f.write_str("tau"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: usize,
    pub label: Label,
    pub to: usize,
}

/// A finite LTS with states `0..num_states`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    num_states: usize,
    initial: usize,
    transitions: Vec<Transition>,
    /// Input actions the system may perform, whether or not any transition
    /// carries them.
    actions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("header declares {declared} transitions but {found} were listed")]
    CountMismatch { declared: usize, found: usize },
}

impl Lts {
    pub fn new(num_states: usize, initial: usize) -> Self {
        assert!(initial < num_states.max(1), "initial state out of range");
        Lts {
            num_states: num_states.max(1),
            initial,
            transitions: Vec::new(),
            actions: Vec::new(),
        }
    }

    pub fn with_actions(mut self, actions: Vec<String>) -> Self {
        self.actions = actions;
        self
    }

    pub fn add_state(&mut self) -> usize {
        self.num_states += 1;
        self.num_states - 1
    }

    pub fn add_transition(&mut self, from: usize, label: Label, to: usize) {
        assert!(from < self.num_states && to < self.num_states, "transition endpoint out of range");
        self.transitions.push(Transition { from, label, to });
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Declared input actions plus any input label that occurs on a transition.
    pub fn action_universe(&self) -> Vec<String> {
        let mut all = self.actions.clone();
        for t in &self.transitions {
            if let Label::Input(a) = &t.label {
                if !all.contains(a) {
                    all.push(a.clone());
                }
            }
        }
        all
    }

    /// Outgoing transitions per state as `(label, target)` pairs.
    pub fn successors(&self) -> Vec<Vec<(&Label, usize)>> {
        let mut out = vec![Vec::new(); self.num_states];
        for t in &self.transitions {
            out[t.from].push((&t.label, t.to));
        }
        out
    }

    pub fn out_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_states];
        for t in &self.transitions {
            deg[t.from] += 1;
        }
        deg
    }

    /// States in breadth-first order from the initial state, visiting the
    /// successors of each state by (label text, target). Unreachable states
    /// follow in index order.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut succ: Vec<Vec<(String, usize)>> = vec![Vec::new(); self.num_states];
        for t in &self.transitions {
            succ[t.from].push((t.label.to_string(), t.to));
        }
        for s in &mut succ {
            s.sort();
        }
        let mut seen = vec![false; self.num_states];
        let mut order = Vec::with_capacity(self.num_states);
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for (_, t) in &succ[s] {
                if !seen[*t] {
                    seen[*t] = true;
                    queue.push_back(*t);
                }
            }
        }
        order.extend((0..self.num_states).filter(|&s| !seen[s]));
        order
    }

    pub fn reachable(&self) -> Vec<bool> {
        let succ = self.successors();
        let mut seen = vec![false; self.num_states];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for &(_, t) in &succ[s] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Renders the LTS in `.aut` format with canonical numbering and
    /// transition order, so equal graphs give equal bytes.
    pub fn to_aut(&self) -> String {
        let order = self.bfs_order();
        let mut rank = vec![0; self.num_states];
        for (i, &s) in order.iter().enumerate() {
            rank[s] = i;
        }
        let mut lines: Vec<(usize, String, usize)> = self
            .transitions
            .iter()
            .map(|t| (rank[t.from], t.label.to_string(), rank[t.to]))
            .collect();
        lines.sort();
        let mut out = format!("des (0,{},{})\n", lines.len(), self.num_states);
        for (f, l, t) in lines {
            out.push_str(&format!("({f},\"{l}\",{t})\n"));
        }
        out
    }

    pub fn from_aut(text: &str) -> Result<Lts, AutError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or(AutError::Malformed {
            line: 1,
            msg: "missing `des` header".into(),
        })?;
        let bad = |line: usize, msg: &str| AutError::Malformed {
            line: line + 1,
            msg: msg.to_string(),
        };
        let inner = header
            .trim()
            .strip_prefix("des")
            .map(str::trim)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| bad(hl, "expected `des (<initial>,<transitions>,<states>)`"))?;
        let nums: Vec<usize> = inner
            .split(',')
            .map(|n| n.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(hl, "header fields must be non-negative integers"))?;
        let [initial, declared, states] = nums[..] else {
            return Err(bad(hl, "header must have three fields"));
        };
        if states == 0 || initial >= states {
            return Err(bad(hl, "initial state out of range"));
        }
        let mut lts = Lts::new(states, initial);
        for (ln, line) in lines {
            let body = line
                .trim()
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| bad(ln, "expected `(<from>,<label>,<to>)`"))?;
            let (from, rest) = body.split_once(',').ok_or_else(|| bad(ln, "missing label"))?;
            let (label, to) = rest.rsplit_once(',').ok_or_else(|| bad(ln, "missing target"))?;
            let label = label.trim();
            let label = label
                .strip_prefix('"')
                .and_then(|l| l.strip_suffix('"'))
                .unwrap_or(label);
            let from: usize = from.trim().parse().map_err(|_| bad(ln, "bad source state"))?;
            let to: usize = to.trim().parse().map_err(|_| bad(ln, "bad target state"))?;
            if from >= states || to >= states {
                return Err(bad(ln, "state index out of range"));
            }
            lts.add_transition(from, Label::parse(label), to);
        }
        if lts.num_transitions() != declared {
            return Err(AutError::CountMismatch {
                declared,
                found: lts.num_transitions(),
            });
        }
        Ok(lts)
    }
}

/// The modulo-3 counter: `count(0) count(1) count(2) reset`, repeated.
pub fn counter() -> Lts {
    let mut lts = Lts::new(4, 0);
    for (i, l) in ["count(0)", "count(1)", "count(2)", "reset"].into_iter().enumerate() {
        lts.add_transition(i, Label::Input(l.into()), (i + 1) % 4);
    }
    lts
}
