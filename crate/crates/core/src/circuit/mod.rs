//! Circuit IR: native and composite instructions, registers and stage tags.

mod lower;
mod metrics;
mod text;

pub use lower::lower;
pub use metrics::{metrics, CircuitMetrics, StageMetrics};
pub use text::{parse_circuit, serialize};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("qubit q{0} out of range")]
    QubitOutOfRange(usize),
    #[error("cbit c{0} out of range")]
    CbitOutOfRange(usize),
    #[error("operand q{0} used twice in one instruction")]
    DuplicateOperand(usize),
    #[error("condition reads c{0} before any measurement wrote it")]
    CbitNotMeasured(usize),
    #[error("pool of {have} wires is too small, {need} required")]
    PoolTooSmall { need: usize, have: usize },
    #[error("tree fan-out requires fresh targets")]
    TreeNotFresh,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instruction is not native: {0}")]
    NotNative(String),
}

/// Single-qubit gates. `U(theta, phi, lambda)` is the standard three-angle unitary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate1 {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Ry(f64),
    Rz(f64),
    U(f64, f64, f64),
}

impl Gate1 {
    pub fn inverse(self) -> Gate1 {
        match self {
            Gate1::S => Gate1::Sdg,
            Gate1::Sdg => Gate1::S,
            Gate1::T => Gate1::Tdg,
            Gate1::Tdg => Gate1::T,
            Gate1::Ry(t) => Gate1::Ry(-t),
            Gate1::Rz(t) => Gate1::Rz(-t),
            Gate1::U(t, p, l) => Gate1::U(-t, -l, -p),
            g => g,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Z,
}

/// XOR (optionally negated) of previously measured classical bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub cbits: Vec<usize>,
    pub negated: bool,
}

impl Condition {
    pub fn xor(cbits: Vec<usize>) -> Self {
        Self { cbits, negated: false }
    }

    pub fn eval(&self, bits: &[bool]) -> bool {
        self.cbits.iter().fold(self.negated, |acc, &c| acc ^ bits[c])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FanoutMode {
    /// A chain of CNOTs from the control.
    Sequential,
    /// A doubling copy tree. Only valid onto fresh `|0>` targets.
    Tree,
    /// Constant-depth measurement-and-feedforward block.
    Maf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Gqsp,
    Onehot,
    Permutation,
    Garbage,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Gqsp, Stage::Onehot, Stage::Permutation, Stage::Garbage];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Gqsp => "gqsp",
            Stage::Onehot => "onehot",
            Stage::Permutation => "permutation",
            Stage::Garbage => "garbage",
        }
    }

    pub fn from_name(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Gate1 {
        gate: Gate1,
        q: usize,
    },
    Cx {
        c: usize,
        t: usize,
    },
    Measure {
        q: usize,
        c: usize,
    },
    Cond {
        cond: Condition,
        pauli: Pauli,
        q: usize,
    },
    Round,
    Toffoli {
        c1: usize,
        c2: usize,
        t: usize,
    },
    Cswap {
        c: usize,
        a: usize,
        b: usize,
    },
    Mcx {
        controls: Vec<usize>,
        target: usize,
        pool: Vec<usize>,
    },
    Mcry {
        controls: Vec<usize>,
        target: usize,
        theta: f64,
        pool: Vec<usize>,
    },
    Mcrz {
        controls: Vec<usize>,
        target: usize,
        theta: f64,
        pool: Vec<usize>,
    },
    /// `RY(angles[k])` on the target when the controls read `k` (first control
    /// most significant), for every `k` at once.
    Ucry {
        controls: Vec<usize>,
        target: usize,
        angles: Vec<f64>,
    },
    /// As `Ucry` with `RZ`.
    Ucrz {
        controls: Vec<usize>,
        target: usize,
        angles: Vec<f64>,
    },
    Fanout {
        control: usize,
        targets: Vec<usize>,
        mode: FanoutMode,
        pool: Vec<usize>,
    },
    /// Flips the target iff the OR of the controls is 1.
    OrCx {
        controls: Vec<usize>,
        target: usize,
        pool: Vec<usize>,
    },
    /// Flips the target by the XOR of the controls.
    ParCx {
        controls: Vec<usize>,
        target: usize,
        maf: bool,
        pool: Vec<usize>,
    },
}

impl Op {
    pub fn is_native(&self) -> bool {
        matches!(self, Op::Gate1 { .. } | Op::Cx { .. } | Op::Measure { .. } | Op::Cond { .. } | Op::Round)
    }

    /// Gates counted by `size`.
    pub fn is_native_gate(&self) -> bool {
        matches!(self, Op::Gate1 { .. } | Op::Cx { .. })
    }

    /// Every qubit the instruction touches, pool wires included.
    pub fn qubits(&self) -> Vec<usize> {
        let mut v = self.operands();
        v.extend_from_slice(self.pool());
        v
    }

    /// Qubits the instruction acts on, excluding pool wires.
    pub fn operands(&self) -> Vec<usize> {
        match self {
            Op::Gate1 { q, .. } | Op::Measure { q, .. } | Op::Cond { q, .. } => vec![*q],
            Op::Cx { c, t } => vec![*c, *t],
            Op::Round => vec![],
            Op::Toffoli { c1, c2, t } => vec![*c1, *c2, *t],
            Op::Cswap { c, a, b } => vec![*c, *a, *b],
            Op::Mcx { controls, target, .. }
            | Op::Mcry { controls, target, .. }
            | Op::Mcrz { controls, target, .. }
            | Op::Ucry { controls, target, .. }
            | Op::Ucrz { controls, target, .. }
            | Op::OrCx { controls, target, .. }
            | Op::ParCx { controls, target, .. } => {
                let mut v = controls.clone();
                v.push(*target);
                v
            }
            Op::Fanout { control, targets, .. } => {
                let mut v = vec![*control];
                v.extend_from_slice(targets);
                v
            }
        }
    }

    pub fn pool(&self) -> &[usize] {
        match self {
            Op::Mcx { pool, .. }
            | Op::Mcry { pool, .. }
            | Op::Mcrz { pool, .. }
            | Op::Fanout { pool, .. }
            | Op::OrCx { pool, .. }
            | Op::ParCx { pool, .. } => pool,
            _ => &[],
        }
    }

    /// The inverse of a unitary instruction; `None` for measurement primitives.
    ///
    /// Every composite here is self-inverse up to its angle.
    pub fn inverse(&self) -> Option<Op> {
        Some(match self {
            Op::Gate1 { gate, q } => Op::Gate1 { gate: gate.inverse(), q: *q },
            Op::Measure { .. } | Op::Cond { .. } | Op::Round => return None,
            Op::Mcry { controls, target, theta, pool } => {
                Op::Mcry { controls: controls.clone(), target: *target, theta: -theta, pool: pool.clone() }
            }
            Op::Mcrz { controls, target, theta, pool } => {
                Op::Mcrz { controls: controls.clone(), target: *target, theta: -theta, pool: pool.clone() }
            }
            Op::Ucry { controls, target, angles } => {
                Op::Ucry { controls: controls.clone(), target: *target, angles: angles.iter().map(|a| -a).collect() }
            }
            Op::Ucrz { controls, target, angles } => {
                Op::Ucrz { controls: controls.clone(), target: *target, angles: angles.iter().map(|a| -a).collect() }
            }
            Op::Fanout { mode: FanoutMode::Tree, .. } => return None,
            other => other.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub op: Op,
    pub stage: Option<Stage>,
}

/// A named contiguous range of wires.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn wire(&self, i: usize) -> usize {
        assert!(i < self.len, "register {} index {i} out of range", self.name);
        self.start + i
    }

    pub fn wires(&self) -> Vec<usize> {
        (self.start..self.start + self.len).collect()
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_cbits: usize,
    pub instrs: Vec<Instruction>,
    pub registers: Vec<Register>,
    /// Stage applied to instructions pushed from now on.
    #[serde(skip)]
    pub current_stage: Option<Stage>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.num_qubits == other.num_qubits
            && self.num_cbits == other.num_cbits
            && self.instrs == other.instrs
            && self.registers == other.registers
    }
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, ..Default::default() }
    }

    pub fn alloc_cbit(&mut self) -> usize {
        self.num_cbits += 1;
        self.num_cbits - 1
    }

    pub fn push(&mut self, op: Op) {
        self.instrs.push(Instruction { op, stage: self.current_stage });
    }

    pub fn set_stage(&mut self, stage: Option<Stage>) {
        self.current_stage = stage;
    }

    pub fn add_register(&mut self, name: &str, len: usize) -> Register {
        let start = self.registers.last().map_or(0, |r| r.start + r.len);
        let r = Register { name: name.to_string(), start, len };
        self.registers.push(r.clone());
        self.num_qubits = self.num_qubits.max(start + len);
        r
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    /// Number of system qubits (the `A` register), or all qubits without one.
    pub fn system_qubits(&self) -> usize {
        self.register("A").map_or(self.num_qubits, |r| r.len)
    }

    pub fn g1(&mut self, gate: Gate1, q: usize) {
        self.push(Op::Gate1 { gate, q });
    }

    pub fn x(&mut self, q: usize) {
        self.g1(Gate1::X, q);
    }

    pub fn h(&mut self, q: usize) {
        self.g1(Gate1::H, q);
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        self.push(Op::Cx { c, t });
    }

    pub fn measure(&mut self, q: usize) -> usize {
        let c = self.alloc_cbit();
        self.push(Op::Measure { q, c });
        c
    }

    pub fn cond(&mut self, cbits: Vec<usize>, pauli: Pauli, q: usize) {
        self.push(Op::Cond { cond: Condition::xor(cbits), pauli, q });
    }

    pub fn round(&mut self) {
        self.push(Op::Round);
    }

    pub fn is_native(&self) -> bool {
        self.instrs.iter().all(|i| i.op.is_native())
    }

    pub fn count_measurements(&self) -> usize {
        self.instrs.iter().filter(|i| matches!(i.op, Op::Measure { .. })).count()
    }

    /// Checks operand ranges, distinctness and that conditions only read
    /// measured bits.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut written = vec![false; self.num_cbits];
        for ins in &self.instrs {
            let qs = ins.op.qubits();
            let mut seen = std::collections::HashSet::new();
            for &q in &qs {
                if q >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange(q));
                }
                if !seen.insert(q) {
                    return Err(CircuitError::DuplicateOperand(q));
                }
            }
            match &ins.op {
                Op::Measure { c, .. } => {
                    if *c >= self.num_cbits {
                        return Err(CircuitError::CbitOutOfRange(*c));
                    }
                    written[*c] = true;
                }
                Op::Cond { cond, .. } => {
                    for &c in &cond.cbits {
                        if c >= self.num_cbits {
                            return Err(CircuitError::CbitOutOfRange(c));
                        }
                        if !written[c] {
                            return Err(CircuitError::CbitNotMeasured(c));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}
