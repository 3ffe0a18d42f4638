use std::collections::BTreeMap;

use serde::Serialize;

use super::{Circuit, Instruction, Op, Stage};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageMetrics {
    pub size: usize,
    pub quantum_depth: usize,
    pub maf_rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircuitMetrics {
    pub size: usize,
    pub quantum_depth: usize,
    pub maf_rounds: usize,
    pub ancilla_count: usize,
    pub classical_depth_bound: usize,
    pub per_stage: BTreeMap<Stage, StageMetrics>,
}

/// Metrics of a circuit.
///
/// `size` counts native one- and two-qubit gates. Depth is an ASAP schedule in
/// which measurements occupy their qubit, a conditioned gate lands strictly
/// after the measurements it reads, and a round synchronizes every wire. A
/// composite instruction counts as one gate on all its wires.
pub fn metrics(c: &Circuit) -> CircuitMetrics {
    let all = schedule(c.num_qubits, c.num_cbits, c.instrs.iter());
    let mut per_stage = BTreeMap::new();
    for st in Stage::ALL {
        if c.instrs.iter().any(|i| i.stage == Some(st)) {
            let m = schedule(c.num_qubits, c.num_cbits, c.instrs.iter().filter(|i| i.stage == Some(st)));
            per_stage.insert(st, m);
        }
    }
    let classical_depth_bound = c
        .instrs
        .iter()
        .filter_map(|i| match &i.op {
            Op::Cond { cond, .. } => Some(xor_tree_depth(cond.cbits.len()) + usize::from(cond.negated)),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    CircuitMetrics {
        size: all.size,
        quantum_depth: all.quantum_depth,
        maf_rounds: all.maf_rounds,
        ancilla_count: c.num_qubits - c.system_qubits(),
        classical_depth_bound,
        per_stage,
    }
}

fn xor_tree_depth(fan_in: usize) -> usize {
    if fan_in <= 1 {
        0
    } else {
        crate::state::ceil_log2(fan_in)
    }
}

/// ASAP metrics of an instruction subsequence.
pub(crate) fn schedule<'a>(nq: usize, nc: usize, instrs: impl Iterator<Item = &'a Instruction>) -> StageMetrics {
    let mut level = vec![0usize; nq];
    let mut cbit_ready = vec![0usize; nc];
    let mut depth = 0;
    let mut size = 0;
    let mut rounds = 0;
    for ins in instrs {
        match &ins.op {
            Op::Round => {
                rounds += 1;
                level.iter_mut().for_each(|l| *l = depth);
            }
            Op::Measure { q, c } => {
                let l = level[*q] + 1;
                level[*q] = l;
                cbit_ready[*c] = l;
                depth = depth.max(l);
            }
            Op::Cond { cond, q, .. } => {
                let ready = cond.cbits.iter().map(|&b| cbit_ready[b]).max().unwrap_or(0);
                let l = level[*q].max(ready) + 1;
                level[*q] = l;
                depth = depth.max(l);
            }
            op => {
                if op.is_native_gate() || !op.is_native() {
                    size += 1;
                }
                let qs = op.qubits();
                let l = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
                for q in qs {
                    level[q] = l;
                }
                depth = depth.max(l);
            }
        }
    }
    StageMetrics { size, quantum_depth: depth, maf_rounds: rounds }
}
