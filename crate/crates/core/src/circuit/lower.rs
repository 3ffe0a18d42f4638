use super::{Circuit, CircuitError};
use crate::synth;

/// Expands every composite instruction into native gates, keeping stage tags,
/// registers and existing classical bits.
pub fn lower(c: &Circuit) -> Result<Circuit, CircuitError> {
    let mut out = Circuit {
        num_qubits: c.num_qubits,
        num_cbits: c.num_cbits,
        instrs: Vec::with_capacity(c.instrs.len()),
        registers: c.registers.clone(),
        current_stage: None,
    };
    for ins in &c.instrs {
        out.set_stage(ins.stage);
        if ins.op.is_native() {
            out.push(ins.op.clone());
        } else {
            synth::emit(&mut out, &ins.op)?;
        }
    }
    out.set_stage(None);
    Ok(out)
}
