//! Compiler and verifier for sparse quantum state preparation.
//!
//! A sparse state `sum_i alpha_i |q_i>` with `d` nonzero amplitudes on `n`
//! qubits is prepared in four stages: a dense preparation of the amplitudes on
//! `ceil(log2 d)` qubits, a one-hot encoding, a permutation onto the target
//! bitstrings and the removal of the one-hot garbage. Circuits come in a
//! purely unitary form and a measurement-and-feedforward form that trades
//! depth for mid-circuit measurements.

pub mod circuit;
pub mod gqsp;
pub mod pipeline;
pub mod sim;
pub mod state;
pub mod sweep;
pub mod synth;
pub mod verify;

pub use circuit::{lower, metrics, parse_circuit, serialize, Circuit, CircuitMetrics, Op, Stage};
pub use pipeline::{compile_composite, compile_sqsp, Mode};
pub use sim::{OutcomePolicy, RunResult, SimState};
pub use state::{parse_state_spec, DenseState, SparseStateSpec};
