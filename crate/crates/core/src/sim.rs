//! Sparse statevector simulation of native dynamic circuits.
//!
//! The state is a list of `(basis index, amplitude)` pairs. Wire 0 is the most
//! significant bit of the index, so at most 64 wires can be simulated; memory
//! scales with the number of nonzero amplitudes rather than `2^wires`.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, Gate1, Op, Pauli};
use crate::state::DenseState;

/// Amplitudes smaller than this are dropped after each gate.
const PRUNE: f64 = 1e-15;
/// Forced outcomes below this probability are rejected.
pub const IMPOSSIBLE: f64 = 1e-12;
pub const DEFAULT_BRANCH_LIMIT: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{0} wires exceed the simulator limit of 64")]
    TooManyQubits(usize),
    #[error("instruction is not native: {0}")]
    NotNative(String),
    #[error("forced outcome {outcome} at measurement {index} has probability {prob:e}")]
    ImpossibleOutcome { index: usize, outcome: bool, prob: f64 },
    #[error("forced outcome list has {given} entries but the circuit measures more")]
    OutcomesExhausted { given: usize },
    #[error("{count} measurements exceed the branch enumeration limit {limit}")]
    BranchLimit { count: usize, limit: usize },
    #[error("qubit q{0} out of range")]
    QubitOutOfRange(usize),
}

/// How measurement outcomes are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum OutcomePolicy {
    /// Born-rule sampling from a `ChaCha8Rng` seeded with this value.
    Sample(u64),
    /// Outcomes in measurement order.
    Forced(Vec<bool>),
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub state: SimState,
    pub outcomes: Vec<bool>,
    pub cbits: Vec<bool>,
    pub branch_probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    nq: usize,
    entries: Vec<(u64, Complex64)>,
}

fn gate_matrix(g: Gate1) -> [[Complex64; 2]; 2] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match g {
        Gate1::X => [[z, one], [one, z]],
        Gate1::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        Gate1::Z => [[one, z], [z, -one]],
        Gate1::H => [[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]],
        Gate1::S => [[one, z], [z, c(0.0, 1.0)]],
        Gate1::Sdg => [[one, z], [z, c(0.0, -1.0)]],
        Gate1::T => [[one, z], [z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        Gate1::Tdg => [[one, z], [z, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]],
        Gate1::Ry(t) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        Gate1::Rz(t) => [[Complex64::from_polar(1.0, -t / 2.0), z], [z, Complex64::from_polar(1.0, t / 2.0)]],
        Gate1::U(t, p, l) => {
            let (s, co) = (t / 2.0).sin_cos();
            [
                [c(co, 0.0), -Complex64::from_polar(s, l)],
                [Complex64::from_polar(s, p), Complex64::from_polar(co, p + l)],
            ]
        }
    }
}

impl SimState {
    /// All wires in `|0>`.
    pub fn zero(nq: usize) -> Self {
        Self::basis(nq, 0)
    }

    pub fn basis(nq: usize, index: u64) -> Self {
        assert!(nq <= 64);
        Self { nq, entries: vec![(index, Complex64::new(1.0, 0.0))] }
    }

    pub fn from_entries(nq: usize, entries: Vec<(u64, Complex64)>) -> Self {
        assert!(nq <= 64);
        let mut merged: Vec<(u64, Complex64)> = Vec::with_capacity(entries.len());
        let mut pos: HashMap<u64, usize> = HashMap::new();
        for (k, a) in entries {
            match pos.get(&k) {
                Some(&i) => merged[i].1 += a,
                None => {
                    pos.insert(k, merged.len());
                    merged.push((k, a));
                }
            }
        }
        Self { nq, entries: merged }
    }

    /// A dense state of `dense.n` system wires followed by `|0>` ancillas.
    pub fn from_dense(nq: usize, dense: &DenseState) -> Self {
        let shift = nq - dense.n;
        let entries = dense
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, &a)| ((i as u64) << shift, a))
            .collect();
        Self { nq, entries }
    }

    pub fn num_qubits(&self) -> usize {
        self.nq
    }

    pub fn entries(&self) -> &[(u64, Complex64)] {
        &self.entries
    }

    pub fn support(&self) -> usize {
        self.entries.len()
    }

    fn mask(&self, q: usize) -> u64 {
        1u64 << (self.nq - 1 - q)
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.entries.iter().filter(|(k, _)| *k == index).map(|(_, a)| *a).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        self.entries.iter_mut().for_each(|(_, a)| *a /= s);
    }

    fn as_map(&self) -> HashMap<u64, Complex64> {
        let mut m = HashMap::with_capacity(self.entries.len());
        for &(k, a) in &self.entries {
            *m.entry(k).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        m
    }

    pub fn inner(&self, other: &SimState) -> Complex64 {
        let m = self.as_map();
        other.entries.iter().filter_map(|(k, b)| m.get(k).map(|a| a.conj() * b)).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &SimState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Euclidean distance between the two amplitude vectors.
    pub fn distance(&self, other: &SimState) -> f64 {
        let mut m = self.as_map();
        for &(k, b) in &other.entries {
            *m.entry(k).or_insert(Complex64::new(0.0, 0.0)) -= b;
        }
        m.values().map(|d| d.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability that every wire from `n` onward is `|0>`.
    pub fn ancilla_clean_probability(&self, n: usize) -> f64 {
        let low = if n >= self.nq { 0 } else { u64::MAX >> (64 - (self.nq - n)) };
        self.entries.iter().filter(|(k, _)| k & low == 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// `|<target (x) 0..0 | self>|^2` for a target on the first `target.n` wires.
    pub fn fidelity_with_system(&self, target: &DenseState) -> f64 {
        let shift = self.nq - target.n;
        let low = if shift == 0 { 0 } else { u64::MAX >> (64 - shift) };
        let ov: Complex64 = self
            .entries
            .iter()
            .filter(|(k, _)| k & low == 0)
            .map(|(k, a)| target.amps[(k >> shift) as usize].conj() * a)
            .sum();
        ov.norm_sqr()
    }

    /// Amplitudes of the first `n` wires with all later wires `|0>`.
    pub fn system_state(&self, n: usize) -> DenseState {
        assert!(n <= 26, "dense system state limited to 26 qubits");
        let shift = self.nq - n;
        let low = if shift == 0 { 0 } else { u64::MAX >> (64 - shift) };
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for &(k, a) in &self.entries {
            if k & low == 0 {
                amps[(k >> shift) as usize] += a;
            }
        }
        DenseState::new(n, amps)
    }

    fn check(&self, q: usize) -> Result<(), SimError> {
        if q >= self.nq {
            Err(SimError::QubitOutOfRange(q))
        } else {
            Ok(())
        }
    }

    pub fn apply_gate1(&mut self, g: Gate1, q: usize) {
        self.apply_controlled_gate1(&[], g, q);
    }

    /// Applies `g` to `q` on the branches where every control is 1.
    pub fn apply_controlled_gate1(&mut self, controls: &[usize], g: Gate1, q: usize) {
        let cmask = controls.iter().fold(0u64, |m, &c| m | self.mask(c));
        let bit = self.mask(q);
        let mat = gate_matrix(g);
        let zero = Complex64::new(0.0, 0.0);
        if mat[0][1] == zero && mat[1][0] == zero {
            for (k, a) in self.entries.iter_mut() {
                if *k & cmask == cmask {
                    *a *= if *k & bit == 0 { mat[0][0] } else { mat[1][1] };
                }
            }
            return;
        }
        if mat[0][0] == zero && mat[1][1] == zero {
            for (k, a) in self.entries.iter_mut() {
                if *k & cmask == cmask {
                    *a *= if *k & bit == 0 { mat[1][0] } else { mat[0][1] };
                    *k ^= bit;
                }
            }
            return;
        }
        let mut groups: Vec<(u64, Complex64, Complex64)> = Vec::new();
        let mut pos: HashMap<u64, usize> = HashMap::with_capacity(self.entries.len());
        let mut untouched = Vec::new();
        for &(k, a) in &self.entries {
            if k & cmask != cmask {
                untouched.push((k, a));
                continue;
            }
            let base = k & !bit;
            let i = *pos.entry(base).or_insert_with(|| {
                groups.push((base, zero, zero));
                groups.len() - 1
            });
            if k & bit == 0 {
                groups[i].1 += a;
            } else {
                groups[i].2 += a;
            }
        }
        let mut out = untouched;
        for (base, a0, a1) in groups {
            let n0 = mat[0][0] * a0 + mat[0][1] * a1;
            let n1 = mat[1][0] * a0 + mat[1][1] * a1;
            if n0.norm() > PRUNE {
                out.push((base, n0));
            }
            if n1.norm() > PRUNE {
                out.push((base | bit, n1));
            }
        }
        self.entries = out;
    }

    pub fn apply_cx(&mut self, c: usize, t: usize) {
        let (cm, tm) = (self.mask(c), self.mask(t));
        for (k, _) in self.entries.iter_mut() {
            if *k & cm != 0 {
                *k ^= tm;
            }
        }
    }

    /// Applies a classical reversible map to every basis index.
    pub fn permute(&mut self, f: impl Fn(u64) -> u64) {
        for (k, _) in self.entries.iter_mut() {
            *k = f(*k);
        }
    }

    pub fn bit(&self, key: u64, q: usize) -> bool {
        key & self.mask(q) != 0
    }

    /// Probability of reading 1 on `q`.
    pub fn prob_one(&self, q: usize) -> f64 {
        let m = self.mask(q);
        self.entries.iter().filter(|(k, _)| k & m != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects `q` onto `outcome` and renormalizes; returns the probability.
    pub fn collapse(&mut self, q: usize, outcome: bool) -> f64 {
        let m = self.mask(q);
        self.entries.retain(|(k, _)| (k & m != 0) == outcome);
        let p = self.norm_sqr();
        if p > 0.0 {
            let s = p.sqrt();
            self.entries.iter_mut().for_each(|(_, a)| *a /= s);
        }
        p
    }

    /// Runs a native circuit from this state.
    pub fn run_circuit(&self, circuit: &Circuit, policy: &OutcomePolicy) -> Result<RunResult, SimError> {
        let mut exec = Exec::new(self.clone(), circuit)?;
        let mut rng = match policy {
            OutcomePolicy::Sample(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
            OutcomePolicy::Forced(_) => None,
        };
        while let Some(q) = exec.advance(circuit)? {
            let idx = exec.outcomes.len();
            let p1 = exec.state.prob_one(q).clamp(0.0, 1.0);
            let outcome = match (policy, rng.as_mut()) {
                (OutcomePolicy::Forced(v), _) => {
                    let o = *v.get(idx).ok_or(SimError::OutcomesExhausted { given: v.len() })?;
                    let p = if o { p1 } else { 1.0 - p1 };
                    if p < IMPOSSIBLE {
                        return Err(SimError::ImpossibleOutcome { index: idx, outcome: o, prob: p });
                    }
                    o
                }
                (_, Some(r)) => r.gen::<f64>() < p1,
                (_, None) => unreachable!(),
            };
            exec.resolve(circuit, q, outcome);
        }
        Ok(exec.finish())
    }

    /// Every measurement branch with nonnegligible probability.
    pub fn enumerate_branches(&self, circuit: &Circuit, limit: usize) -> Result<Vec<RunResult>, SimError> {
        let count = circuit.count_measurements();
        if count > limit {
            return Err(SimError::BranchLimit { count, limit });
        }
        let mut out = Vec::new();
        let mut stack = vec![Exec::new(self.clone(), circuit)?];
        while let Some(mut exec) = stack.pop() {
            match exec.advance(circuit)? {
                None => out.push(exec.finish()),
                Some(q) => {
                    let p1 = exec.state.prob_one(q).clamp(0.0, 1.0);
                    if p1 >= IMPOSSIBLE {
                        let mut one = exec.clone();
                        one.resolve(circuit, q, true);
                        stack.push(one);
                    }
                    if 1.0 - p1 >= IMPOSSIBLE {
                        exec.resolve(circuit, q, false);
                        stack.push(exec);
                    }
                }
            }
        }
        out.sort_by(|a, b| a.outcomes.cmp(&b.outcomes));
        Ok(out)
    }
}

#[derive(Clone)]
struct Exec {
    state: SimState,
    cbits: Vec<bool>,
    outcomes: Vec<bool>,
    prob: f64,
    pc: usize,
}

impl Exec {
    fn new(state: SimState, circuit: &Circuit) -> Result<Self, SimError> {
        if circuit.num_qubits > 64 {
            return Err(SimError::TooManyQubits(circuit.num_qubits));
        }
        if circuit.num_qubits != state.nq {
            return Err(SimError::QubitOutOfRange(circuit.num_qubits.max(state.nq) - 1));
        }
        Ok(Self { state, cbits: vec![false; circuit.num_cbits], outcomes: Vec::new(), prob: 1.0, pc: 0 })
    }

    /// Executes until the next measurement, returning its qubit.
    fn advance(&mut self, circuit: &Circuit) -> Result<Option<usize>, SimError> {
        while let Some(ins) = circuit.instrs.get(self.pc) {
            match &ins.op {
                Op::Gate1 { gate, q } => {
                    self.state.check(*q)?;
                    self.state.apply_gate1(*gate, *q);
                }
                Op::Cx { c, t } => {
                    self.state.check(*c)?;
                    self.state.check(*t)?;
                    self.state.apply_cx(*c, *t);
                }
                Op::Measure { q, .. } => {
                    self.state.check(*q)?;
                    return Ok(Some(*q));
                }
                Op::Cond { cond, pauli, q } => {
                    if cond.eval(&self.cbits) {
                        let g = match pauli {
                            Pauli::X => Gate1::X,
                            Pauli::Z => Gate1::Z,
                        };
                        self.state.apply_gate1(g, *q);
                    }
                }
                Op::Round => {}
                other => return Err(SimError::NotNative(format!("{other:?}"))),
            }
            self.pc += 1;
        }
        Ok(None)
    }

    fn resolve(&mut self, circuit: &Circuit, q: usize, outcome: bool) {
        let Op::Measure { c, .. } = circuit.instrs[self.pc].op else { unreachable!() };
        self.prob *= self.state.collapse(q, outcome);
        self.cbits[c] = outcome;
        self.outcomes.push(outcome);
        self.pc += 1;
    }

    fn finish(self) -> RunResult {
        RunResult { state: self.state, outcomes: self.outcomes, cbits: self.cbits, branch_probability: self.prob }
    }
}

/// Applies the defining action of any instruction directly, without lowering.
///
/// This is the independent semantics that lowered circuits are checked
/// against. Measurement primitives are not supported.
pub fn apply_reference(s: &mut SimState, op: &Op) -> Result<(), SimError> {
    let nq = s.nq;
    for q in op.qubits() {
        s.check(q)?;
    }
    let mask = |q: usize| 1u64 << (nq - 1 - q);
    let all = |k: u64, qs: &[usize]| qs.iter().all(|&q| k & mask(q) != 0);
    match op {
        Op::Gate1 { gate, q } => s.apply_gate1(*gate, *q),
        Op::Cx { c, t } => s.apply_cx(*c, *t),
        Op::Toffoli { c1, c2, t } => {
            let (a, b, t) = (mask(*c1), mask(*c2), mask(*t));
            s.permute(|k| if k & a != 0 && k & b != 0 { k ^ t } else { k });
        }
        Op::Cswap { c, a, b } => {
            let (c, a, b) = (mask(*c), mask(*a), mask(*b));
            s.permute(|k| if k & c != 0 && ((k & a != 0) != (k & b != 0)) { k ^ a ^ b } else { k });
        }
        Op::Mcx { controls, target, .. } => {
            let t = mask(*target);
            s.permute(|k| if all(k, controls) { k ^ t } else { k });
        }
        Op::Mcry { controls, target, theta, .. } => s.apply_controlled_gate1(controls, Gate1::Ry(*theta), *target),
        Op::Mcrz { controls, target, theta, .. } => s.apply_controlled_gate1(controls, Gate1::Rz(*theta), *target),
        Op::Ucry { controls, target, angles } | Op::Ucrz { controls, target, angles } => {
            let ry = matches!(op, Op::Ucry { .. });
            let k = controls.len();
            for (pattern, &a) in angles.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let flips: Vec<usize> =
                    (0..k).filter(|&i| pattern >> (k - 1 - i) & 1 == 0).map(|i| controls[i]).collect();
                flips.iter().for_each(|&q| s.apply_gate1(Gate1::X, q));
                s.apply_controlled_gate1(controls, if ry { Gate1::Ry(a) } else { Gate1::Rz(a) }, *target);
                flips.iter().for_each(|&q| s.apply_gate1(Gate1::X, q));
            }
        }
        Op::Fanout { control, targets, .. } => {
            let c = mask(*control);
            let t = targets.iter().fold(0, |m, &q| m | mask(q));
            s.permute(|k| if k & c != 0 { k ^ t } else { k });
        }
        Op::OrCx { controls, target, .. } => {
            let cm = controls.iter().fold(0, |m, &q| m | mask(q));
            let t = mask(*target);
            s.permute(|k| if k & cm != 0 { k ^ t } else { k });
        }
        Op::ParCx { controls, target, .. } => {
            let cm = controls.iter().fold(0, |m, &q| m | mask(q));
            let t = mask(*target);
            s.permute(|k| if (k & cm).count_ones() % 2 == 1 { k ^ t } else { k });
        }
        other => return Err(SimError::NotNative(format!("no reference action for {other:?}"))),
    }
    Ok(())
}
