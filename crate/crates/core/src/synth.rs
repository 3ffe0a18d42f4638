//! Native decompositions of composite gates.
//!
//! Each `synth_*` function appends native gates to a circuit. Pool wires must
//! start in `|0>` and are returned to `|0>`.

use crate::circuit::{Circuit, CircuitError, FanoutMode, Gate1, Op, Pauli};

fn need_pool(pool: &[usize], need: usize) -> Result<(), CircuitError> {
    if pool.len() < need {
        Err(CircuitError::PoolTooSmall { need, have: pool.len() })
    } else {
        Ok(())
    }
}

/// Lowers one composite instruction.
pub fn emit(c: &mut Circuit, op: &Op) -> Result<(), CircuitError> {
    match op {
        Op::Toffoli { c1, c2, t } => synth_toffoli(c, *c1, *c2, *t),
        Op::Cswap { c: ctl, a, b } => synth_cswap(c, *ctl, *a, *b),
        Op::Mcx { controls, target, pool } => return synth_mcx(c, controls, *target, pool),
        Op::Mcry { controls, target, theta, pool } => return synth_mcry(c, controls, *target, *theta, pool),
        Op::Mcrz { controls, target, theta, pool } => return synth_mcrz(c, controls, *target, *theta, pool),
        Op::Ucry { controls, target, angles } => synth_ucr(c, controls, *target, angles, Gate1::Ry),
        Op::Ucrz { controls, target, angles } => synth_ucr(c, controls, *target, angles, Gate1::Rz),
        Op::Fanout { control, targets, mode, pool } => return synth_fanout(c, *control, targets, *mode, pool),
        Op::OrCx { controls, target, pool } => return synth_or_cx(c, controls, *target, pool),
        Op::ParCx { controls, target, maf, pool } => return synth_parity_cx(c, controls, *target, *maf, pool),
        native => c.push(native.clone()),
    }
    Ok(())
}

/// Fifteen-gate Toffoli: size 15, depth 11.
pub fn synth_toffoli(c: &mut Circuit, c1: usize, c2: usize, t: usize) {
    use Gate1::{Tdg, T};
    c.h(t);
    c.cx(c2, t);
    c.g1(Tdg, t);
    c.cx(c1, t);
    c.g1(T, t);
    c.cx(c2, t);
    c.g1(Tdg, t);
    c.cx(c1, t);
    c.g1(T, c2);
    c.g1(T, t);
    c.h(t);
    c.cx(c1, c2);
    c.g1(T, c1);
    c.g1(Tdg, c2);
    c.cx(c1, c2);
}

/// Toffoli with one helper wire that starts and ends in `|0>`.
///
/// Same phase polynomial as [`synth_toffoli`], but the parities touching the
/// target are spread over the helper so that only seven layers separate the
/// controls becoming available from the target being done. Work on the target
/// alone comes first and overlaps with whatever produces the controls.
pub fn synth_toffoli_helper(c: &mut Circuit, c1: usize, c2: usize, t: usize, e: usize) {
    use Gate1::{Tdg, T};
    c.h(t);
    c.cx(t, e);
    c.g1(T, t);
    c.cx(c1, t);
    c.cx(c2, e);
    c.g1(Tdg, t);
    c.g1(Tdg, e);
    c.g1(T, c1);
    c.g1(T, c2);
    c.cx(t, e);
    c.g1(Tdg, e);
    c.cx(c2, t);
    c.g1(T, t);
    c.cx(e, t);
    c.cx(c1, e);
    c.h(t);
    c.cx(c2, e);
}

/// [`synth_toffoli_helper`] reversed and daggered, so the control-side work
/// runs ahead and the target is needed last. Used to uncompute.
pub fn synth_toffoli_helper_mirrored(c: &mut Circuit, c1: usize, c2: usize, t: usize, e: usize) {
    let mut fwd = Circuit::new(c.num_qubits);
    synth_toffoli_helper(&mut fwd, c1, c2, t, e);
    for ins in fwd.instrs.iter().rev() {
        c.push(ins.op.inverse().expect("unitary"));
    }
}

/// Fredkin gate from two CNOTs around a Toffoli.
pub fn synth_cswap(c: &mut Circuit, ctl: usize, a: usize, b: usize) {
    c.cx(b, a);
    synth_toffoli(c, ctl, a, b);
    c.cx(b, a);
}

/// Multi-controlled X via a balanced AND tree of Toffolis into pool wires.
///
/// Needs `k - 2` pool wires for `k >= 3` controls. With `k - 1` further pool
/// wires every Toffoli of the tree gets its own helper wire, which lowers the
/// depth.
pub fn synth_mcx(c: &mut Circuit, controls: &[usize], target: usize, pool: &[usize]) -> Result<(), CircuitError> {
    let k = controls.len();
    match controls {
        [] => c.x(target),
        [a] => c.cx(*a, target),
        [a, b] => match pool.first() {
            Some(&e) => synth_toffoli_helper(c, *a, *b, target, e),
            None => synth_toffoli(c, *a, *b, target),
        },
        _ => {
            need_pool(pool, k - 2)?;
            let (products, rest) = pool.split_at(k - 2);
            let fast = rest.len() >= k - 1;
            let mut helpers = rest.iter().copied();
            let mut free = products.iter().copied();
            let mut level: Vec<usize> = controls.to_vec();
            let mut computed = Vec::new();
            while level.len() > 2 {
                let mut next = Vec::with_capacity(level.len().div_ceil(2));
                for pair in level.chunks(2) {
                    if let [a, b] = pair {
                        let w = free.next().expect("pool size checked");
                        let e = if fast { helpers.next() } else { None };
                        match e {
                            Some(e) => synth_toffoli_helper(c, *a, *b, w, e),
                            None => synth_toffoli(c, *a, *b, w),
                        }
                        computed.push((*a, *b, w, e));
                        next.push(w);
                    } else {
                        next.push(pair[0]);
                    }
                }
                level = next;
            }
            match if fast { helpers.next() } else { None } {
                Some(e) => synth_toffoli_helper(c, level[0], level[1], target, e),
                None => synth_toffoli(c, level[0], level[1], target),
            }
            for &(a, b, w, e) in computed.iter().rev() {
                match e {
                    Some(e) => synth_toffoli_helper_mirrored(c, a, b, w, e),
                    None => synth_toffoli(c, a, b, w),
                }
            }
        }
    }
    Ok(())
}

fn controlled_rotation(
    c: &mut Circuit,
    controls: &[usize],
    target: usize,
    pool: &[usize],
    rot: fn(f64) -> Gate1,
    theta: f64,
) -> Result<(), CircuitError> {
    if controls.is_empty() {
        c.g1(rot(theta), target);
        return Ok(());
    }
    c.g1(rot(theta / 2.0), target);
    synth_mcx(c, controls, target, pool)?;
    c.g1(rot(-theta / 2.0), target);
    synth_mcx(c, controls, target, pool)
}

/// `RY(theta)` on the target when every control is 1.
pub fn synth_mcry(
    c: &mut Circuit,
    controls: &[usize],
    target: usize,
    theta: f64,
    pool: &[usize],
) -> Result<(), CircuitError> {
    controlled_rotation(c, controls, target, pool, Gate1::Ry, theta)
}

/// Two-qubit controlled `RY`.
pub fn synth_cry(c: &mut Circuit, control: usize, target: usize, theta: f64) {
    controlled_rotation(c, &[control], target, &[], Gate1::Ry, theta).expect("no pool needed");
}

/// `RZ(theta)` on the target when every control is 1.
pub fn synth_mcrz(
    c: &mut Circuit,
    controls: &[usize],
    target: usize,
    theta: f64,
    pool: &[usize],
) -> Result<(), CircuitError> {
    controlled_rotation(c, controls, target, pool, Gate1::Rz, theta)
}

/// Uniformly controlled rotation: `rot(angles[k])` on the target when the
/// controls read `k`, first control most significant.
///
/// Gray-code lowering with `2^k` rotations and `2^k` CNOTs and no pool.
/// Rotations whose angle vanishes are dropped.
pub fn synth_ucr(c: &mut Circuit, controls: &[usize], target: usize, angles: &[f64], rot: fn(f64) -> Gate1) {
    let k = controls.len();
    let len = 1usize << k;
    assert_eq!(angles.len(), len, "{k} controls need {len} angles");
    let gray = |l: usize| l ^ (l >> 1);
    let scale = 1.0 / len as f64;
    for l in 0..len {
        let g = gray(l);
        let beta = scale
            * angles.iter().enumerate().map(|(p, a)| if (p & g).count_ones() % 2 == 0 { *a } else { -*a }).sum::<f64>();
        if beta.abs() > 1e-15 {
            c.g1(rot(beta), target);
        }
        if k > 0 {
            let bit = (g ^ gray((l + 1) % len)).trailing_zeros() as usize;
            c.cx(controls[k - 1 - bit], target);
        }
    }
}

/// CNOT pairs of a doubling copy tree from `control` onto fresh `targets`.
pub fn tree_copy_pairs(control: usize, targets: &[usize]) -> Vec<(usize, usize)> {
    let mut sources = vec![control];
    let mut pairs = Vec::with_capacity(targets.len());
    let mut filled = 0;
    while filled < targets.len() {
        let round: Vec<usize> = sources.clone();
        for s in round {
            if filled == targets.len() {
                break;
            }
            pairs.push((s, targets[filled]));
            sources.push(targets[filled]);
            filled += 1;
        }
    }
    pairs
}

/// XORs the control into every target.
///
/// `Tree` assumes the targets are fresh. `Maf` uses one measurement round and
/// as many pool wires as targets.
pub fn synth_fanout(
    c: &mut Circuit,
    control: usize,
    targets: &[usize],
    mode: FanoutMode,
    pool: &[usize],
) -> Result<(), CircuitError> {
    match mode {
        FanoutMode::Sequential => targets.iter().for_each(|&t| c.cx(control, t)),
        FanoutMode::Tree => tree_copy_pairs(control, targets).into_iter().for_each(|(s, t)| c.cx(s, t)),
        FanoutMode::Maf => maf_fanout(c, control, targets, pool)?,
    }
    Ok(())
}

/// One link of the measured chain: a carrier/check pair covering up to two
/// targets, or a lone check wire covering one.
struct Unit {
    carrier: Option<usize>,
    check: usize,
    targets: Vec<usize>,
}

/// Constant-depth fan-out with one measurement round.
///
/// Each unit holds a fresh random bit `r_u` on its wires and copies it into
/// its targets. The check wire of unit `u` ends in `r_{u-1} xor r_u` (with
/// `r_{-1}` the control) and is measured, fixing `r_u = control xor s_0 xor
/// .. xor s_u`. Carriers are measured in the X basis and their outcomes become
/// a Z correction on the control.
fn maf_fanout(c: &mut Circuit, control: usize, targets: &[usize], pool: &[usize]) -> Result<(), CircuitError> {
    let m = targets.len();
    if m == 0 {
        return Ok(());
    }
    need_pool(pool, m)?;
    let mut units = Vec::new();
    if m == 1 {
        units.push(Unit { carrier: None, check: pool[0], targets: vec![targets[0]] });
    } else {
        for j in 0..m / 2 {
            units.push(Unit {
                carrier: Some(pool[2 * j]),
                check: pool[2 * j + 1],
                targets: vec![targets[2 * j], targets[2 * j + 1]],
            });
        }
        if m % 2 == 1 {
            units.push(Unit { carrier: None, check: pool[m - 1], targets: vec![targets[m - 1]] });
        }
    }
    let last = units.len() - 1;

    for u in &units {
        c.h(u.carrier.unwrap_or(u.check));
    }
    for u in &units {
        if let Some(q) = u.carrier {
            c.cx(q, u.check);
        }
    }
    for (k, u) in units.iter().enumerate() {
        let source = u.carrier.unwrap_or(u.check);
        c.cx(source, u.targets[0]);
        if let [_, second] = u.targets[..] {
            // The check wire still holds a lone copy of r_u unless it is the
            // last unit, where the carrier has a free slot instead.
            let from = if k < last { u.check } else { source };
            c.cx(from, second);
        }
    }
    c.cx(control, units[0].check);
    for k in 0..last {
        c.cx(units[k].carrier.expect("only the last unit lacks a carrier"), units[k + 1].check);
    }
    for u in &units {
        if let Some(q) = u.carrier {
            c.h(q);
        }
    }
    let mut checks = Vec::with_capacity(units.len());
    let mut carriers = Vec::new();
    for u in &units {
        checks.push(c.measure(u.check));
        if let Some(q) = u.carrier {
            carriers.push((q, c.measure(q)));
        }
    }
    c.round();
    for (k, u) in units.iter().enumerate() {
        for &t in &u.targets {
            c.cond(checks[..=k].to_vec(), Pauli::X, t);
        }
    }
    if !carriers.is_empty() {
        c.cond(carriers.iter().map(|&(_, b)| b).collect(), Pauli::Z, control);
    }
    for (u, &s) in units.iter().zip(&checks) {
        c.cond(vec![s], Pauli::X, u.check);
    }
    for &(q, b) in &carriers {
        c.cond(vec![b], Pauli::X, q);
    }
    Ok(())
}

/// Flips the target iff at least one control is 1.
pub fn synth_or_cx(c: &mut Circuit, controls: &[usize], target: usize, pool: &[usize]) -> Result<(), CircuitError> {
    if controls.is_empty() {
        return Ok(());
    }
    controls.iter().for_each(|&q| c.x(q));
    synth_mcx(c, controls, target, pool)?;
    controls.iter().for_each(|&q| c.x(q));
    c.x(target);
    Ok(())
}

/// Flips the target by the parity of the controls.
///
/// Unitary form is a CNOT per control. The measured form conjugates a
/// fan-out from the target onto the controls by Hadamards on all of them.
pub fn synth_parity_cx(
    c: &mut Circuit,
    controls: &[usize],
    target: usize,
    maf: bool,
    pool: &[usize],
) -> Result<(), CircuitError> {
    if !maf || controls.len() <= 1 {
        controls.iter().for_each(|&q| c.cx(q, target));
        return Ok(());
    }
    need_pool(pool, controls.len())?;
    c.h(target);
    controls.iter().for_each(|&q| c.h(q));
    maf_fanout(c, target, controls, pool)?;
    c.h(target);
    controls.iter().for_each(|&q| c.h(q));
    Ok(())
}
