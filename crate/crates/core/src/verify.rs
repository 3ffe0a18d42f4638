//! End-to-end checks of compiled circuits against their target state.
//!
//! The first `n` wires of a circuit hold the system register and every later
//! wire must return to `|0>`. Fidelity is the squared overlap of the final
//! state with `target (x) |0..0>`, computed sparsely so that it does not need a
//! dense target vector.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{lower, metrics, Circuit, CircuitError, CircuitMetrics};
use crate::sim::{OutcomePolicy, RunResult, SimError, SimState, DEFAULT_BRANCH_LIMIT};
use crate::state::SparseStateSpec;

/// Minimum fidelity for a run to pass.
pub const FIDELITY_TOL: f64 = 1e-9;
/// Maximum population allowed outside the all-zero ancilla subspace.
pub const ANCILLA_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("circuit has {have} wires but the target needs {need}")]
    TooFewWires { need: usize, have: usize },
}

/// Which measurement branches to check.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Born-rule sampling with each of these seeds.
    Seeds(Vec<u64>),
    /// Every branch; fails when the circuit measures more than the limit.
    Exhaustive { limit: usize },
    /// Every branch when the circuit measures at most `limit` wires,
    /// otherwise sampling with the seeds.
    Auto { seeds: Vec<u64>, limit: usize },
}

impl Method {
    /// `Auto` with seeds `base..base + k` and the default branch limit.
    pub fn auto(base: u64, k: usize) -> Self {
        Method::Auto { seeds: (base..base + k as u64).collect(), limit: DEFAULT_BRANCH_LIMIT }
    }
}

/// One simulated run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    /// Measurement outcomes in measurement order as a `0`/`1` string.
    pub outcomes: String,
    pub branch_probability: f64,
    pub fidelity: f64,
    /// Population with some ancilla wire in `|1>`.
    pub ancilla_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    /// `true` when every branch was simulated.
    pub exhaustive: bool,
    pub runs: Vec<RunRecord>,
    pub min_fidelity: f64,
    pub max_ancilla_residual: f64,
    /// Outcome string of the run with the lowest fidelity.
    pub worst_outcomes: String,
    /// Sum of branch probabilities, 1 for a complete enumeration.
    pub total_probability: f64,
    pub metrics: CircuitMetrics,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.min_fidelity >= 1.0 - FIDELITY_TOL && self.max_ancilla_residual < ANCILLA_TOL
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `|<target (x) 0..0 | state>|^2` with the target on the first `spec.n()` wires.
pub fn fidelity(state: &SimState, spec: &SparseStateSpec) -> f64 {
    let shift = state.num_qubits() - spec.n();
    let low = if shift == 0 { 0 } else { u64::MAX >> (64 - shift) };
    let target: HashMap<u64, Complex64> = spec.entries().iter().copied().collect();
    let ov: Complex64 = state
        .entries()
        .iter()
        .filter(|(k, _)| k & low == 0)
        .filter_map(|(k, a)| target.get(&(k >> shift)).map(|t| t.conj() * a))
        .sum();
    ov.norm_sqr()
}

fn record(r: &RunResult, spec: &SparseStateSpec) -> RunRecord {
    let bits: String = r.outcomes.iter().map(|&b| if b { '1' } else { '0' }).collect();
    RunRecord {
        outcomes: bits,
        branch_probability: r.branch_probability,
        fidelity: fidelity(&r.state, spec),
        ancilla_residual: (1.0 - r.state.ancilla_clean_probability(spec.n())).max(0.0),
    }
}

/// Simulates `circuit` from `|0..0>` and compares each run with `spec`.
///
/// Composite instructions are lowered first.
pub fn verify_circuit(spec: &SparseStateSpec, circuit: &Circuit, method: &Method) -> Result<VerifyReport, VerifyError> {
    if circuit.num_qubits < spec.n() {
        return Err(VerifyError::TooFewWires { need: spec.n(), have: circuit.num_qubits });
    }
    let native = if circuit.is_native() { circuit.clone() } else { lower(circuit)? };
    let init = SimState::zero(native.num_qubits);
    let measured = native.count_measurements();
    let (results, exhaustive) = match method {
        Method::Exhaustive { limit } => (init.enumerate_branches(&native, *limit)?, true),
        Method::Auto { limit, .. } if measured <= *limit => (init.enumerate_branches(&native, *limit)?, true),
        Method::Seeds(seeds) | Method::Auto { seeds, .. } => {
            let mut out = Vec::with_capacity(seeds.len());
            for &s in seeds {
                out.push(init.run_circuit(&native, &OutcomePolicy::Sample(s))?);
                if measured == 0 {
                    break;
                }
            }
            (out, measured == 0)
        }
    };
    let runs: Vec<RunRecord> = results.iter().map(|r| record(r, spec)).collect();
    let worst = runs.iter().min_by(|a, b| a.fidelity.total_cmp(&b.fidelity));
    Ok(VerifyReport {
        exhaustive,
        min_fidelity: worst.map_or(f64::NAN, |r| r.fidelity),
        worst_outcomes: worst.map_or_else(String::new, |r| r.outcomes.clone()),
        max_ancilla_residual: runs.iter().map(|r| r.ancilla_residual).fold(0.0, f64::max),
        total_probability: if exhaustive { runs.iter().map(|r| r.branch_probability).sum() } else { f64::NAN },
        runs,
        metrics: metrics(circuit),
    })
}
