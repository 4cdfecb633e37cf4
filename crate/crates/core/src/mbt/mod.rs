//! On-the-fly model-based testing. The tester walks the model, sends one
//! randomly chosen enabled stimulus per step and compares the single
//! response with the model's output.

mod adapter;
mod sut;

use std::io;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use adapter::{reset, Adapter, LocalAdapter, WireAdapter};
pub use sut::{mutate, serve_stream, serve_sut, Mutation, Reply, Sut, SutServer};

use crate::dsl::ValidatedModel;
use crate::lts::Label;
use crate::semantics::{enabled_inputs, initial_state, step_input};

#[derive(Debug, Error)]
pub enum MbtError {
    #[error("no rule for action `{0}`")]
    UnknownRule(String),
    #[error("bad mutation `{0}`")]
    BadMutation(String),
    #[error("adapter i/o: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TesterConfig {
    pub seed: u64,
    pub max_steps: usize,
    pub response_timeout_ms: u64,
}

impl Default for TesterConfig {
    fn default() -> Self {
        TesterConfig {
            seed: 0,
            max_steps: 1000,
            response_timeout_ms: 1000,
        }
    }
}

impl TesterConfig {
    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.response_timeout_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass { steps: usize },
    /// `trace` ends with the stimulus whose response was wrong.
    Fail { expected: String, observed: String, trace: Vec<Label> },
    Inconclusive { reason: String, trace: Vec<Label> },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    /// Stimuli sent before the verdict, counting the failing one.
    pub fn steps(&self) -> usize {
        match self {
            Verdict::Pass { steps } => *steps,
            Verdict::Fail { trace, .. } | Verdict::Inconclusive { trace, .. } => {
                trace.iter().filter(|l| matches!(l, Label::Input(_))).count()
            }
        }
    }
}

/// The wire form of an output label.
pub fn response_line(label: &Label) -> String {
    match label {
        Label::Output(x, p) => format!("RESP Output {x} {p}"),
        other => other.to_string(),
    }
}

/// Tests a connected, freshly reset SUT against `model`.
pub fn run_test(model: &ValidatedModel, adapter: &mut dyn Adapter, cfg: &TesterConfig) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = initial_state(model);
    let mut trace = Vec::new();
    let inconclusive = |reason: String, trace: Vec<Label>| Verdict::Inconclusive { reason, trace };
    for _ in 0..cfg.max_steps {
        match adapter.poll() {
            Ok(None) => {}
            Ok(Some(msg)) if trace.is_empty() => {
                return inconclusive(format!("SUT sent {msg:?} before any stimulus"), trace);
            }
            Ok(Some(msg)) => {
                return Verdict::Fail {
                    expected: "no output before the next stimulus".into(),
                    observed: msg,
                    trace,
                }
            }
            Err(e) => return inconclusive(format!("adapter i/o: {e}"), trace),
        }
        let enabled = enabled_inputs(model, &state);
        if enabled.is_empty() {
            return inconclusive("model deadlock: no enabled stimulus".into(), trace);
        }
        let action = enabled[rng.gen_range(0..enabled.len())].to_string();
        if let Err(e) = adapter.send(&format!("STIM {action}")) {
            return inconclusive(format!("adapter i/o: {e}"), trace);
        }
        state = step_input(model, &state, &action).expect("stimulus chosen among enabled inputs");
        trace.push(Label::Input(action));
        let expected = state.output();
        match adapter.recv(cfg.timeout()) {
            Ok(Some(line)) if line == response_line(&expected) => trace.push(expected),
            Ok(Some(line)) => {
                return Verdict::Fail {
                    expected: expected.to_string(),
                    observed: line,
                    trace,
                }
            }
            Ok(None) => {
                return Verdict::Fail {
                    expected: expected.to_string(),
                    observed: format!("timeout after {} ms", cfg.response_timeout_ms),
                    trace,
                }
            }
            Err(e) => return inconclusive(format!("adapter i/o: {e}"), trace),
        }
    }
    Verdict::Pass { steps: cfg.max_steps }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KillRow {
    pub mutation: Mutation,
    pub runs: usize,
    pub kills: usize,
    pub inconclusive: usize,
    pub kill_rate: f64,
    /// Mean failing step over the killing runs.
    pub mean_steps_to_fail: Option<f64>,
}

/// Runs every mutation against seeds `cfg.seed .. cfg.seed + n_seeds` with
/// in-process SUTs.
pub fn kill_matrix(
    model: &ValidatedModel,
    mutations: &[Mutation],
    cfg: &TesterConfig,
    n_seeds: u64,
) -> Result<Vec<KillRow>, MbtError> {
    let mut rows = Vec::new();
    for m in mutations {
        let sut = Sut::new(model, m)?;
        let (mut kills, mut inconclusive, mut fail_steps) = (0, 0, 0usize);
        for i in 0..n_seeds {
            let mut adapter = LocalAdapter::new(sut.clone());
            let c = TesterConfig {
                seed: cfg.seed.wrapping_add(i),
                ..*cfg
            };
            match run_test(model, &mut adapter, &c) {
                v @ Verdict::Fail { .. } => {
                    kills += 1;
                    fail_steps += v.steps();
                }
                Verdict::Inconclusive { .. } => inconclusive += 1,
                Verdict::Pass { .. } => {}
            }
        }
        let runs = n_seeds as usize;
        rows.push(KillRow {
            mutation: m.clone(),
            runs,
            kills,
            inconclusive,
            kill_rate: if runs == 0 { 0.0 } else { kills as f64 / runs as f64 },
            mean_steps_to_fail: (kills > 0).then(|| fail_steps as f64 / kills as f64),
        });
    }
    Ok(rows)
}
