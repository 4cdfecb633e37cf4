//! Strong and branching bisimulation by signature-based partition refinement,
//! with distinguishing-trace extraction and quotienting.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::lts::{Label, Lts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Strong,
    Branching,
}

/// Block assignment for every state. Refinement only ever splits blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<usize>,
    count: usize,
}

impl Partition {
    fn single(n: usize) -> Self {
        Partition {
            blocks: vec![0; n],
            count: usize::from(n > 0),
        }
    }

    pub fn block(&self, state: usize) -> usize {
        self.blocks[state]
    }

    pub fn num_blocks(&self) -> usize {
        self.count
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.blocks[a] == self.blocks[b]
    }
}

/// Why two systems are not equivalent: after `trace` (visible labels only for
/// branching), the reached states differ in whether `label` is possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub trace: Vec<Label>,
    pub left_state: usize,
    pub right_state: usize,
    pub label: Label,
    /// `true` if the left state can do `label` and the right one cannot.
    pub enabled_in_left: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivResult {
    pub equivalent: bool,
    pub counterexample: Option<Counterexample>,
    pub block_count: usize,
}

/// `(label index, block or state)`.
type Edge = (usize, usize);

/// Integer-labelled adjacency used by the refinement loops.
struct Graph {
    labels: Vec<Label>,
    tau: Option<usize>,
    succ: Vec<Vec<Edge>>,
}

impl Graph {
    fn new(parts: &[&Lts]) -> (Self, Vec<usize>) {
        let mut labels: Vec<Label> = Vec::new();
        let mut label_id: HashMap<Label, usize> = HashMap::new();
        let mut succ = Vec::new();
        let mut offsets = Vec::new();
        for lts in parts {
            let base = succ.len();
            offsets.push(base);
            succ.extend((0..lts.num_states()).map(|_| Vec::new()));
            for t in lts.transitions() {
                let id = *label_id.entry(t.label.clone()).or_insert_with(|| {
                    labels.push(t.label.clone());
                    labels.len() - 1
                });
                succ[base + t.from].push((id, base + t.to));
            }
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        let tau = label_id.get(&Label::Tau).copied();
        (Graph { labels, tau, succ }, offsets)
    }

    fn len(&self) -> usize {
        self.succ.len()
    }

    fn strong_signatures(&self, p: &Partition) -> Vec<Vec<Edge>> {
        self.succ
            .iter()
            .map(|out| {
                let mut sig: Vec<(usize, usize)> = out.iter().map(|&(l, t)| (l, p.blocks[t])).collect();
                sig.sort_unstable();
                sig.dedup();
                sig
            })
            .collect()
    }

    /// Signature of `s`: every non-inert step `(a, B)` available after a
    /// sequence of inert tau steps (tau steps inside the current block).
    fn branching_signatures(&self, p: &Partition) -> Vec<Vec<Edge>> {
        let n = self.len();
        let mut sigs: Vec<BTreeSet<Edge>> = vec![BTreeSet::new(); n];
        let mut inert: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in 0..n {
            for &(l, t) in &self.succ[s] {
                if Some(l) == self.tau && p.blocks[s] == p.blocks[t] {
                    inert[s].push(t);
                } else {
                    sigs[s].insert((l, p.blocks[t]));
                }
            }
        }
        // Propagate along inert steps until nothing changes; inert-tau
        // cycles converge to a shared signature.
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (s, succ) in inert.iter().enumerate() {
            for &t in succ {
                preds[t].push(s);
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&s| !inert[s].is_empty()).collect();
        let mut queued: Vec<bool> = (0..n).map(|s| !inert[s].is_empty()).collect();
        while let Some(s) = queue.pop_front() {
            queued[s] = false;
            let mut grew = false;
            for &t in &inert[s] {
                if t == s {
                    continue;
                }
                let extra: Vec<(usize, usize)> = sigs[t].difference(&sigs[s]).copied().collect();
                if !extra.is_empty() {
                    sigs[s].extend(extra);
                    grew = true;
                }
            }
            if grew {
                for &q in &preds[s] {
                    if !queued[q] {
                        queued[q] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
        sigs.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    fn refine(&self, kind: Kind) -> Partition {
        let mut p = Partition::single(self.len());
        loop {
            let sigs = match kind {
                Kind::Strong => self.strong_signatures(&p),
                Kind::Branching => self.branching_signatures(&p),
            };
            let mut ids: HashMap<(usize, &[Edge]), usize> = HashMap::new();
            let blocks: Vec<usize> = (0..self.len())
                .map(|s| {
                    let next = ids.len();
                    *ids.entry((p.blocks[s], &sigs[s])).or_insert(next)
                })
                .collect();
            let count = ids.len();
            let stable = count == p.count;
            p = Partition { blocks, count };
            if stable {
                return p;
            }
        }
    }

    fn labels_of(&self, s: usize) -> BTreeSet<usize> {
        self.succ[s].iter().map(|&(l, _)| l).collect()
    }

    /// Visible labels reachable after zero or more tau steps.
    fn weak_labels(&self, s: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for r in self.tau_closure(s) {
            out.extend(self.succ[r].iter().map(|&(l, _)| l).filter(|&l| Some(l) != self.tau));
        }
        out
    }

    fn tau_closure(&self, s: usize) -> Vec<usize> {
        let mut seen = vec![s];
        let mut set: HashSet<usize> = HashSet::from([s]);
        let mut i = 0;
        while i < seen.len() {
            let r = seen[i];
            i += 1;
            for &(l, t) in &self.succ[r] {
                if Some(l) == self.tau && set.insert(t) {
                    seen.push(t);
                }
            }
        }
        seen
    }

    /// `s =tau*=> r -l-> t` targets.
    fn weak_successors(&self, s: usize, l: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .tau_closure(s)
            .into_iter()
            .flat_map(|r| self.succ[r].iter().filter(move |&&(m, _)| m == l).map(|&(_, t)| t))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Picks a distinguishing label from two differing label sets,
    /// preferring tau so internal steps are reported first.
    fn pick(&self, left: &BTreeSet<usize>, right: &BTreeSet<usize>) -> Option<(usize, bool)> {
        let only_left = left.difference(right).map(|&l| (l, true));
        let only_right = right.difference(left).map(|&l| (l, false));
        let mut diff: Vec<(usize, bool)> = only_left.chain(only_right).collect();
        diff.sort_by_key(|&(l, _)| (Some(l) != self.tau, self.labels[l].clone()));
        diff.into_iter().next()
    }

    /// Shortest distinguishing trace by breadth-first search over pairs of
    /// inequivalent states.
    fn counterexample(&self, p: &Partition, kind: Kind, a: usize, b: usize, offset_b: usize) -> Counterexample {
        let mut seen: HashSet<(usize, usize)> = HashSet::from([(a, b)]);
        let mut queue: VecDeque<(usize, usize, Vec<usize>)> = VecDeque::from([(a, b, Vec::new())]);
        let finish = |l: usize, x: usize, y: usize, left: bool, trace: Vec<usize>| Counterexample {
            trace: trace.into_iter().map(|l| self.labels[l].clone()).collect(),
            left_state: x,
            right_state: y - offset_b,
            label: self.labels[l].clone(),
            enabled_in_left: left,
        };
        while let Some((x, y, trace)) = queue.pop_front() {
            let (lx, ly) = match kind {
                Kind::Strong => (self.labels_of(x), self.labels_of(y)),
                Kind::Branching => (self.weak_labels(x), self.weak_labels(y)),
            };
            if let Some((l, left)) = self.pick(&lx, &ly) {
                return finish(l, x, y, left, trace);
            }
            let mut next: Vec<(usize, usize, Option<usize>)> = Vec::new();
            match kind {
                Kind::Strong => {
                    for &(l, x2) in &self.succ[x] {
                        for &(m, y2) in &self.succ[y] {
                            if l == m {
                                next.push((x2, y2, Some(l)));
                            }
                        }
                    }
                }
                Kind::Branching => {
                    for &(l, x2) in &self.succ[x] {
                        if Some(l) == self.tau {
                            next.push((x2, y, None));
                        }
                    }
                    for &(l, y2) in &self.succ[y] {
                        if Some(l) == self.tau {
                            next.push((x, y2, None));
                        }
                    }
                    for &l in &lx {
                        for x2 in self.weak_successors(x, l) {
                            for y2 in self.weak_successors(y, l) {
                                next.push((x2, y2, Some(l)));
                            }
                        }
                    }
                }
            }
            for (x2, y2, l) in next {
                if !p.same_block(x2, y2) && seen.insert((x2, y2)) {
                    let mut t = trace.clone();
                    t.extend(l);
                    queue.push_back((x2, y2, t));
                }
            }
        }
        // Not reachable for finite systems in practice; fall back to the
        // signature difference of the initial pair.
        let sigs = match kind {
            Kind::Strong => self.strong_signatures(p),
            Kind::Branching => self.branching_signatures(p),
        };
        let left: BTreeSet<usize> = sigs[a].iter().map(|&(l, _)| l).collect();
        let right: BTreeSet<usize> = sigs[b].iter().map(|&(l, _)| l).collect();
        let (l, left_side) = self
            .pick(&left, &right)
            .or_else(|| left.iter().next().map(|&l| (l, true)))
            .unwrap_or((0, true));
        Counterexample {
            trace: Vec::new(),
            left_state: a,
            right_state: b - offset_b,
            label: self.labels.get(l).cloned().unwrap_or(Label::Tau),
            enabled_in_left: left_side,
        }
    }
}

fn compare(a: &Lts, b: &Lts, kind: Kind) -> EquivResult {
    let (g, offsets) = Graph::new(&[a, b]);
    let p = g.refine(kind);
    let (ia, ib) = (a.initial(), offsets[1] + b.initial());
    let equivalent = p.same_block(ia, ib);
    EquivResult {
        equivalent,
        counterexample: (!equivalent).then(|| g.counterexample(&p, kind, ia, ib, offsets[1])),
        block_count: p.num_blocks(),
    }
}

pub fn strong_bisim(a: &Lts, b: &Lts) -> EquivResult {
    compare(a, b, Kind::Strong)
}

/// Divergence-blind branching bisimilarity with `tau` as the internal action.
pub fn branching_bisim(a: &Lts, b: &Lts) -> EquivResult {
    compare(a, b, Kind::Branching)
}

pub fn equivalent(a: &Lts, b: &Lts, kind: Kind) -> EquivResult {
    compare(a, b, kind)
}

/// Coarsest partition of a single LTS under the given equivalence.
pub fn partition(lts: &Lts, kind: Kind) -> Partition {
    Graph::new(&[lts]).0.refine(kind)
}

/// The LTS over equivalence classes. Inert tau self-loops are dropped for
/// branching. States are renumbered breadth-first from the initial class.
pub fn quotient(lts: &Lts, kind: Kind) -> Lts {
    let p = partition(lts, kind);
    let mut edges: BTreeSet<(usize, Label, usize)> = BTreeSet::new();
    for t in lts.transitions() {
        let (f, to) = (p.block(t.from), p.block(t.to));
        if kind == Kind::Branching && t.label.is_tau() && f == to {
            continue;
        }
        edges.insert((f, t.label.clone(), to));
    }
    let mut raw = Lts::new(p.num_blocks(), p.block(lts.initial()));
    for (f, l, t) in &edges {
        raw.add_transition(*f, l.clone(), *t);
    }
    let order = raw.bfs_order();
    let mut rank = vec![0; order.len()];
    for (i, &s) in order.iter().enumerate() {
        rank[s] = i;
    }
    let mut out = Lts::new(p.num_blocks(), 0).with_actions(lts.action_universe());
    let mut renumbered: Vec<(usize, Label, usize)> =
        edges.into_iter().map(|(f, l, t)| (rank[f], l, rank[t])).collect();
    renumbered.sort();
    for (f, l, t) in renumbered {
        out.add_transition(f, l, t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::counter;

    fn lts(n: usize, edges: &[(usize, &str, usize)]) -> Lts {
        let mut l = Lts::new(n, 0);
        for &(f, a, t) in edges {
            l.add_transition(f, Label::parse(a), t);
        }
        l
    }

    #[test]
    fn counter_is_self_equivalent_and_minimal() {
        let c = counter();
        let r = strong_bisim(&c, &c);
        assert!(r.equivalent && r.counterexample.is_none());
        assert_eq!(r.block_count, 4);
        assert_eq!(quotient(&c, Kind::Strong).to_aut(), c.to_aut());
        assert_eq!(partition(&c, Kind::Strong).num_blocks(), 4);
    }

    #[test]
    fn inert_tau_is_absorbed() {
        let a = lts(2, &[(0, "tau", 1), (1, "a", 1)]);
        let b = lts(1, &[(0, "a", 0)]);
        assert!(branching_bisim(&a, &b).equivalent);
        let r = strong_bisim(&a, &b);
        assert!(!r.equivalent);
        let cx = r.counterexample.unwrap();
        assert_eq!(cx.label, Label::Tau);
        assert!(cx.enabled_in_left && cx.trace.is_empty());
    }

    #[test]
    fn non_inert_tau_is_detected() {
        let a = lts(4, &[(0, "tau", 1), (0, "a", 2), (1, "b", 3)]);
        let b = lts(3, &[(0, "a", 1), (0, "b", 2)]);
        let r = branching_bisim(&a, &b);
        assert!(!r.equivalent);
        let cx = r.counterexample.unwrap();
        // After the silent step the left side lost `a`.
        assert_eq!((cx.left_state, cx.right_state), (1, 0));
        assert_eq!(cx.label, Label::parse("a"));
        assert!(!cx.enabled_in_left);
    }

    #[test]
    fn parallel_duplicates_merge_in_quotient() {
        let a = lts(5, &[(0, "a", 1), (0, "a", 2), (1, "b", 3), (2, "b", 4)]);
        let q = quotient(&a, Kind::Strong);
        assert_eq!((q.num_states(), q.num_transitions()), (3, 2));
        assert!(strong_bisim(&q, &a).equivalent);
    }

    #[test]
    fn branching_quotient_drops_inert_tau() {
        let a = lts(3, &[(0, "tau", 1), (1, "a", 2), (2, "tau", 0)]);
        let q = quotient(&a, Kind::Branching);
        assert_eq!(q.to_aut(), "des (0,1,1)\n(0,\"a\",0)\n");
        assert!(branching_bisim(&q, &a).equivalent);
    }

    #[test]
    fn strong_counterexample_follows_common_trace() {
        let a = lts(3, &[(0, "a", 1), (1, "b", 2)]);
        let b = lts(3, &[(0, "a", 1), (1, "c", 2)]);
        let cx = strong_bisim(&a, &b).counterexample.unwrap();
        assert_eq!(cx.trace, vec![Label::parse("a")]);
        assert_eq!(cx.label, Label::parse("b"));
        assert!(cx.enabled_in_left);
    }

    #[test]
    fn tau_cycles_do_not_hang() {
        let a = lts(3, &[(0, "tau", 1), (1, "tau", 0), (1, "a", 2), (2, "tau", 2)]);
        let b = lts(2, &[(0, "a", 1)]);
        // Divergence-blind: the tau loops are inert.
        assert!(branching_bisim(&a, &b).equivalent);
        assert!(!strong_bisim(&a, &b).equivalent);
    }
}
