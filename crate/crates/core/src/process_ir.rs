//! Second back end: models compiled to straight-line stack-machine programs
//! over a flat slot vector, with its own LTS explorer.
//!
//! Nothing here calls into [`crate::semantics`] for evaluation; the two back
//! ends only share the value types and the LTS container, so a bug in one is
//! not silently reproduced by the other.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::dsl::{GuardExpr, Literal, Stmt, ValidatedModel, OUTPUT_PLANE, OUTPUT_TYPE};
use crate::lts::{Label, Lts};
use crate::semantics::{Plane, XRay, DEFAULT_STATE_LIMIT};

/// Integer coding of values in slots: booleans as 0/1, planes 1..=4 and
/// X-ray types 5..=8.
pub fn encode(lit: Literal) -> i64 {
    match lit {
        Literal::Bool(b) => b as i64,
        Literal::Plane(p) => match p {
            Plane::None => 1,
            Plane::FR => 2,
            Plane::LT => 3,
            Plane::BI => 4,
        },
        Literal::XRay(x) => match x {
            XRay::Standby => 5,
            XRay::Fluo => 6,
            XRay::SingleShot => 7,
            XRay::Series => 8,
        },
    }
}

fn decode_plane(v: i64) -> Option<Plane> {
    Plane::ALL.get(usize::try_from(v - 1).ok()?).copied()
}

fn decode_xray(v: i64) -> Option<XRay> {
    XRay::ALL.get(usize::try_from(v - 5).ok()?).copied()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    PushConst(i64),
    LoadSlot(usize),
    StoreSlot(usize),
    Not,
    And,
    Or,
    Eq,
    /// Pops a value; if it is 0, skips the next `n` instructions.
    JumpIfFalse(usize),
    /// Skips the next `n` instructions.
    Jump(usize),
    Halt,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::PushConst(v) => write!(f, "PUSH {v}"),
            Instruction::LoadSlot(s) => write!(f, "LOAD {s}"),
            Instruction::StoreSlot(s) => write!(f, "STORE {s}"),
            Instruction::Not => f.write_str("NOT"),
            Instruction::And => f.write_str("AND"),
            Instruction::Or => f.write_str("OR"),
            Instruction::Eq => f.write_str("EQ"),
            Instruction::JumpIfFalse(n) => write!(f, "JMPF {n}"),
            Instruction::Jump(n) => write!(f, "JMP {n}"),
            Instruction::Halt => f.write_str("HALT"),
        }
    }
}

/// One line per instruction: `<idx>: <OPCODE> <operand?>`.
pub fn disassemble(program: &[Instruction]) -> String {
    program
        .iter()
        .enumerate()
        .map(|(i, ins)| format!("{i}: {ins}\n"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VmError {
    #[error("stack underflow at instruction {0}")]
    StackUnderflow(usize),
    #[error("jump out of program at instruction {0}")]
    BadJump(usize),
    #[error("slot {1} out of range at instruction {0}")]
    BadSlot(usize, usize),
    #[error("program did not halt within {0} steps")]
    NoHalt(usize),
}

/// Runs a program against `slots`. Returns the top of stack at `Halt`, if any.
/// Every emitted program jumps forward only, so it halts within
/// `program.len()` steps; anything longer is reported as an error.
pub fn run(program: &[Instruction], slots: &mut [i64]) -> Result<Option<i64>, VmError> {
    let mut stack: Vec<i64> = Vec::with_capacity(8);
    let mut pc = 0usize;
    for _ in 0..program.len() {
        let ins = *program.get(pc).ok_or(VmError::BadJump(pc))?;
        let at = pc;
        pc += 1;
        let pop = |stack: &mut Vec<i64>| stack.pop().ok_or(VmError::StackUnderflow(at));
        match ins {
            Instruction::PushConst(v) => stack.push(v),
            Instruction::LoadSlot(s) => stack.push(*slots.get(s).ok_or(VmError::BadSlot(at, s))?),
            Instruction::StoreSlot(s) => {
                let v = pop(&mut stack)?;
                *slots.get_mut(s).ok_or(VmError::BadSlot(at, s))? = v;
            }
            Instruction::Not => {
                let v = pop(&mut stack)?;
                stack.push((v == 0) as i64);
            }
            Instruction::And | Instruction::Or | Instruction::Eq => {
                let b = pop(&mut stack)?;
                let a = pop(&mut stack)?;
                stack.push(match ins {
                    Instruction::And => (a != 0 && b != 0) as i64,
                    Instruction::Or => (a != 0 || b != 0) as i64,
                    _ => (a == b) as i64,
                });
            }
            Instruction::JumpIfFalse(n) => {
                if pop(&mut stack)? == 0 {
                    pc += n;
                }
            }
            Instruction::Jump(n) => pc += n,
            Instruction::Halt => return Ok(stack.pop()),
        }
    }
    Err(VmError::NoHalt(program.len()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub action: String,
    pub guard: Vec<Instruction>,
    pub update: Vec<Instruction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledProcess {
    /// Slot names: boolean variables, plane variables, then the two outputs.
    pub slots: Vec<String>,
    pub initial: Vec<i64>,
    /// One alternative per input action, in declaration order.
    pub alternatives: Vec<Alternative>,
}

impl CompiledProcess {
    pub fn output_type_slot(&self) -> usize {
        self.slots.len() - 2
    }

    pub fn output_plane_slot(&self) -> usize {
        self.slots.len() - 1
    }

    pub fn is_enabled(&self, alt: usize, slots: &[i64]) -> bool {
        let mut scratch = slots.to_vec();
        matches!(run(&self.alternatives[alt].guard, &mut scratch), Ok(Some(v)) if v != 0)
    }

    pub fn apply(&self, alt: usize, slots: &mut [i64]) -> Result<(), VmError> {
        run(&self.alternatives[alt].update, slots).map(|_| ())
    }

    pub fn output_label(&self, slots: &[i64]) -> Label {
        let x = decode_xray(slots[self.output_type_slot()]).expect("output type slot holds an X-ray code");
        let p = decode_plane(slots[self.output_plane_slot()]).expect("output plane slot holds a plane code");
        Label::Output(x, p)
    }

    /// Human-readable listing of every alternative.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.slots.iter().enumerate() {
            out.push_str(&format!("slot {i} = {name} (init {})\n", self.initial[i]));
        }
        for alt in &self.alternatives {
            out.push_str(&format!("alternative {}\n  guard:\n", alt.action));
            for line in disassemble(&alt.guard).lines() {
                out.push_str(&format!("    {line}\n"));
            }
            out.push_str("  update:\n");
            for line in disassemble(&alt.update).lines() {
                out.push_str(&format!("    {line}\n"));
            }
        }
        out
    }
}

struct Emitter<'a> {
    slot_of: &'a HashMap<&'a str, usize>,
}

impl Emitter<'_> {
    fn slot(&self, name: &str) -> usize {
        self.slot_of[name]
    }

    fn guard(&self, g: &GuardExpr, code: &mut Vec<Instruction>) {
        match g {
            GuardExpr::Const(b) => code.push(Instruction::PushConst(*b as i64)),
            GuardExpr::Var(v) => code.push(Instruction::LoadSlot(self.slot(v))),
            GuardExpr::Cmp(v, lit) => {
                code.push(Instruction::LoadSlot(self.slot(v)));
                code.push(Instruction::PushConst(encode(*lit)));
                code.push(Instruction::Eq);
            }
            GuardExpr::Not(e) => {
                self.guard(e, code);
                code.push(Instruction::Not);
            }
            GuardExpr::And(a, b) => {
                self.guard(a, code);
                self.guard(b, code);
                code.push(Instruction::And);
            }
            GuardExpr::Or(a, b) => {
                self.guard(a, code);
                self.guard(b, code);
                code.push(Instruction::Or);
            }
        }
    }

    fn stmts(&self, body: &[Stmt], code: &mut Vec<Instruction>) {
        for s in body {
            match s {
                Stmt::Assign(v, lit) => {
                    code.push(Instruction::PushConst(encode(*lit)));
                    code.push(Instruction::StoreSlot(self.slot(v)));
                }
                Stmt::IfThen(c, then) => {
                    self.guard(c, code);
                    let mut inner = Vec::new();
                    self.stmts(then, &mut inner);
                    code.push(Instruction::JumpIfFalse(inner.len()));
                    code.extend(inner);
                }
            }
        }
    }
}

pub fn compile(model: &ValidatedModel) -> CompiledProcess {
    let mut slots: Vec<String> = Vec::new();
    let mut initial = Vec::new();
    for (n, b) in model.bool_vars() {
        slots.push(n.clone());
        initial.push(encode(Literal::Bool(*b)));
    }
    for (n, p) in model.plane_vars() {
        slots.push(n.clone());
        initial.push(encode(Literal::Plane(*p)));
    }
    slots.push(OUTPUT_TYPE.into());
    initial.push(encode(Literal::XRay(XRay::Standby)));
    slots.push(OUTPUT_PLANE.into());
    initial.push(encode(Literal::Plane(Plane::None)));

    let slot_of: HashMap<&str, usize> = slots.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let em = Emitter { slot_of: &slot_of };
    let alternatives = model
        .actions()
        .iter()
        .enumerate()
        .map(|(i, action)| {
            let rule = model.rule_at(i);
            let mut guard = Vec::new();
            em.guard(&rule.guard, &mut guard);
            guard.push(Instruction::Halt);
            let mut update = Vec::new();
            em.stmts(&rule.do_clause, &mut update);
            update.push(Instruction::Halt);
            Alternative {
                action: action.clone(),
                guard,
                update,
            }
        })
        .collect();
    CompiledProcess {
        slots,
        initial,
        alternatives,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompiledBuildError {
    #[error("state space exceeds the limit of {0} states")]
    StateSpaceLimitExceeded(usize),
    #[error(transparent)]
    Vm(#[from] VmError),
}

pub fn build_lts_compiled(model: &ValidatedModel) -> Result<Lts, CompiledBuildError> {
    build_lts_compiled_with_limit(model, DEFAULT_STATE_LIMIT)
}

/// Explores the compiled process with the same input/output alternation as
/// the reference builder: `(ready, slots)` states, where `ready` means the
/// process waits for an input.
pub fn build_lts_compiled_with_limit(model: &ValidatedModel, limit: usize) -> Result<Lts, CompiledBuildError> {
    let proc = compile(model);
    let mut ids: HashMap<(bool, Vec<i64>), usize> = HashMap::new();
    let mut work = VecDeque::new();
    let start = (true, proc.initial.clone());
    ids.insert(start.clone(), 0);
    work.push_back(start);
    let mut edges = Vec::new();

    while let Some((ready, slots)) = work.pop_front() {
        let from = ids[&(ready, slots.clone())];
        let mut successors = Vec::new();
        if ready {
            for (i, alt) in proc.alternatives.iter().enumerate() {
                if proc.is_enabled(i, &slots) {
                    let mut next = slots.clone();
                    proc.apply(i, &mut next)?;
                    successors.push((Label::Input(alt.action.clone()), (false, next)));
                }
            }
        } else {
            successors.push((proc.output_label(&slots), (true, slots)));
        }
        for (label, key) in successors {
            let to = match ids.get(&key) {
                Some(&i) => i,
                None => {
                    if ids.len() >= limit {
                        return Err(CompiledBuildError::StateSpaceLimitExceeded(limit));
                    }
                    let i = ids.len();
                    ids.insert(key.clone(), i);
                    work.push_back(key);
                    i
                }
            };
            edges.push((from, label, to));
        }
    }

    let mut lts = Lts::new(ids.len(), 0).with_actions(model.actions().to_vec());
    for (f, l, t) in edges {
        lts.add_transition(f, l, t);
    }
    Ok(lts)
}
