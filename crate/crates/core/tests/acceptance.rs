//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqsp_core::circuit::{FanoutMode, Gate1, Pauli};
use sqsp_core::gqsp::{emit_layer, AmplitudeBst};
use sqsp_core::sim::apply_reference;
use sqsp_core::state::{ceil_log2, fidelity as dense_fidelity};
use sqsp_core::sweep::{ols, ols_origin, random_spec, seed_from_env, sweep};
use sqsp_core::synth::{emit, synth_cry, synth_toffoli_helper, synth_toffoli_helper_mirrored};
use sqsp_core::verify::{verify_circuit, Method};
use sqsp_core::{compile_sqsp, lower, metrics, Circuit, DenseState, Mode, Op, OutcomePolicy, SimState, Stage};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn basis_index(nq: usize, wires: &[usize], k: usize) -> u64 {
    let w = wires.len();
    wires.iter().enumerate().fold(0u64, |idx, (j, &q)| idx | (((k >> (w - 1 - j)) & 1) as u64) << (nq - 1 - q))
}

/// Largest deviation between `low` and the reference action of `op` over
/// every basis input on `wires`.
///
/// Every measurement branch is checked. A branch may differ from the
/// reference by a global phase, but that phase and the branch probability
/// must be the same for every input, so each branch acts as a fixed multiple
/// of the reference matrix.
fn fragment_error(op: &Op, low: &Circuit, wires: &[usize]) -> f64 {
    let nq = low.num_qubits;
    let mut worst = 0.0f64;
    let mut per_branch: BTreeMap<Vec<bool>, (Complex64, f64)> = BTreeMap::new();
    let mut branch_count = None;
    for k in 0..1usize << wires.len() {
        let init = SimState::basis(nq, basis_index(nq, wires, k));
        let mut want = init.clone();
        apply_reference(&mut want, op).expect("reference action");
        let branches = init.enumerate_branches(low, 64).expect("enumerable");
        if *branch_count.get_or_insert(branches.len()) != branches.len() {
            return f64::INFINITY;
        }
        for b in &branches {
            let ov = want.inner(&b.state);
            let (phase, p) = *per_branch.entry(b.outcomes.clone()).or_insert((ov / ov.norm(), b.branch_probability));
            let scaled: Vec<(u64, Complex64)> = want.entries().iter().map(|&(i, a)| (i, a * phase)).collect();
            worst = worst.max(b.state.distance(&SimState::from_entries(nq, scaled)));
            worst = worst.max((p - b.branch_probability).abs());
        }
    }
    if per_branch.len() != branch_count.unwrap_or(0) {
        return f64::INFINITY;
    }
    worst
}

fn lowered(nq: usize, op: &Op) -> Circuit {
    let mut c = Circuit::new(nq);
    emit(&mut c, op).expect("lowers");
    c
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env());
    let (mut worst_f, mut worst_r, mut failures, mut exhaustive) = (1.0f64, 0.0f64, 0usize, 0usize);
    for _ in 0..200 {
        let n = rng.gen_range(2..=8usize);
        let d = rng.gen_range(1..=6usize.min(1 << n));
        let spec = random_spec(&mut rng, n, d);
        for mode in [Mode::Unitary, Mode::Maf] {
            let c = compile_sqsp(&spec, mode).expect("compiles");
            let seeds: Vec<u64> = (0..20).map(|_| rng.gen()).collect();
            let mut reports = vec![verify_circuit(&spec, &c, &Method::Seeds(seeds)).expect("simulates")];
            if mode == Mode::Maf && lower(&c).unwrap().count_measurements() <= 12 {
                reports.push(verify_circuit(&spec, &c, &Method::Exhaustive { limit: 12 }).expect("enumerates"));
                exhaustive += 1;
            }
            for r in reports {
                worst_f = worst_f.min(r.min_fidelity);
                worst_r = worst_r.max(r.max_ancilla_residual);
                failures += usize::from(!r.passed());
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 300.0,
        format!(
            "200 specs x 2 modes, {exhaustive} exhaustive MaF checks, min fidelity {worst_f:.3e} off 1 = {:.2e}, max ancilla residual {worst_r:.2e}, {failures} failing, {secs:.1}s",
            1.0 - worst_f
        ),
    )
}

fn criterion_2() -> Outcome {
    let probs = [0.05, 0.1, 0.03, 0.17, 0.35, 0.09, 0.18, 0.03];
    let amps = |p: &[f64]| -> Vec<Complex64> { p.iter().map(|&x| Complex64::new(x.sqrt(), 0.0)).collect() };
    let bst = AmplitudeBst::new(&amps(&probs));
    let want_x = [(1, 0, 0.35), (1, 1, 0.65), (2, 0, 0.15), (2, 1, 0.2), (2, 2, 0.44), (2, 3, 0.21)];
    let x_err = want_x.iter().map(|&(i, k, p)| (bst.x(i, k) - f64::sqrt(p)).abs()).fold(0.0, f64::max);
    let psi1 = [0.35, 0.0, 0.0, 0.0, 0.65, 0.0, 0.0, 0.0];
    let psi2 = [0.15, 0.0, 0.2, 0.0, 0.44, 0.0, 0.21, 0.0];
    let mut fids = Vec::new();
    for (layers, want) in [(1, &psi1), (2, &psi2), (3, &probs)] {
        let mut c = Circuit::new(3);
        for i in 0..layers {
            emit_layer(&mut c, &bst, i, &[0, 1, 2]);
        }
        let out = SimState::zero(3).run_circuit(&lower(&c).unwrap(), &OutcomePolicy::Sample(0)).unwrap().state;
        fids.push(dense_fidelity(&out.system_state(3), &DenseState::new(3, amps(want))));
    }
    let min_f = fids.iter().copied().fold(1.0, f64::min);
    outcome(
        x_err <= 1e-12 && min_f >= 1.0 - 1e-10,
        format!(
            "max |x - expected| {x_err:.1e}; fidelity psi1 {:.12}, psi2 {:.12}, psi3 {:.12}",
            fids[0], fids[1], fids[2]
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rows: Vec<(String, f64)> = Vec::new();
    let toffoli = Op::Toffoli { c1: 0, c2: 1, t: 2 };
    let low = lowered(3, &toffoli);
    let toffoli_size = metrics(&low).size;
    rows.push(("toffoli".into(), fragment_error(&toffoli, &low, &[0, 1, 2])));
    let mut helper = Circuit::new(4);
    synth_toffoli_helper(&mut helper, 0, 1, 2, 3);
    rows.push(("toffoli with helper".into(), fragment_error(&toffoli, &helper, &[0, 1, 2])));
    let mut mirrored = Circuit::new(4);
    synth_toffoli_helper_mirrored(&mut mirrored, 0, 1, 2, 3);
    rows.push(("toffoli with helper, mirrored".into(), fragment_error(&toffoli, &mirrored, &[0, 1, 2])));
    let fredkin = Op::Cswap { c: 0, a: 1, b: 2 };
    rows.push(("fredkin".into(), fragment_error(&fredkin, &lowered(3, &fredkin), &[0, 1, 2])));
    let mut cry = Circuit::new(2);
    synth_cry(&mut cry, 0, 1, 0.9137);
    let cry_ref = Op::Mcry { controls: vec![0], target: 1, theta: 0.9137, pool: vec![] };
    rows.push(("cry".into(), fragment_error(&cry_ref, &cry, &[0, 1])));
    for k in 1..=5usize {
        let controls: Vec<usize> = (0..k).collect();
        let wires: Vec<usize> = (0..=k).collect();
        let pool: Vec<usize> = (k + 1..k + 1 + 2 * k).collect();
        let nq = k + 1 + pool.len();
        let ops = [
            ("mcx", Op::Mcx { controls: controls.clone(), target: k, pool: pool.clone() }),
            (
                "mcx, minimal pool",
                Op::Mcx { controls: controls.clone(), target: k, pool: pool[..k.saturating_sub(2)].to_vec() },
            ),
            ("mcry", Op::Mcry { controls: controls.clone(), target: k, theta: 1.234 - k as f64, pool: pool.clone() }),
            ("mcrz", Op::Mcrz { controls: controls.clone(), target: k, theta: 0.77 + k as f64, pool: pool.clone() }),
            ("or-cx", Op::OrCx { controls: controls.clone(), target: k, pool: pool.clone() }),
            ("parity-cx", Op::ParCx { controls: controls.clone(), target: k, maf: false, pool: vec![] }),
            (
                "parity-cx via maf fan-out",
                Op::ParCx { controls: controls.clone(), target: k, maf: true, pool: pool.clone() },
            ),
            (
                "fan-out sequential",
                Op::Fanout { control: 0, targets: (1..=k).collect(), mode: FanoutMode::Sequential, pool: vec![] },
            ),
            (
                "fan-out maf",
                Op::Fanout { control: 0, targets: (1..=k).collect(), mode: FanoutMode::Maf, pool: pool.clone() },
            ),
        ];
        for (name, op) in ops {
            rows.push((format!("{name} k={k}"), fragment_error(&op, &lowered(nq, &op), &wires)));
        }
        // The doubling tree copies out of targets it has already filled, so it
        // is only defined for targets that start in |0>.
        let tree = Op::Fanout { control: 0, targets: (1..=k).collect(), mode: FanoutMode::Tree, pool: vec![] };
        rows.push((format!("fan-out tree k={k}"), fragment_error(&tree, &lowered(nq, &tree), &[0])));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..=5usize {
        let controls: Vec<usize> = (1..=k).collect();
        let wires: Vec<usize> = (0..=k).collect();
        let angles: Vec<f64> = (0..1 << k).map(|_| rng.gen_range(-3.0..3.0)).collect();
        for (name, op) in [
            ("ucry", Op::Ucry { controls: controls.clone(), target: 0, angles: angles.clone() }),
            ("ucrz", Op::Ucrz { controls: controls.clone(), target: 0, angles: angles.clone() }),
        ] {
            rows.push((format!("{name} k={k}"), fragment_error(&op, &lowered(k + 1, &op), &wires)));
        }
    }
    let worst = rows.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    outcome(
        worst.1 <= 1e-12 && toffoli_size == 15,
        format!("{} fragments, worst {} at {:.1e}, toffoli size {toffoli_size}", rows.len(), worst.0, worst.1),
    )
}

fn criterion_4() -> Outcome {
    let mut mismatches = 0;
    let mut witnesses = Vec::new();
    for k in 1..=6usize {
        let controls: Vec<usize> = (0..k).collect();
        let pool: Vec<usize> = (k + 1..k + 1 + 2 * k).collect();
        let nq = k + 1 + pool.len();
        let or = lower(&{
            let mut c = Circuit::new(nq);
            c.push(Op::OrCx { controls: controls.clone(), target: k, pool: pool.clone() });
            c
        })
        .unwrap();
        let par = lower(&{
            let mut c = Circuit::new(nq);
            c.push(Op::ParCx { controls: controls.clone(), target: k, maf: true, pool: pool.clone() });
            c
        })
        .unwrap();
        let wires: Vec<usize> = (0..=k).collect();
        let agree_on = |pattern: usize| -> bool {
            let init = SimState::basis(nq, basis_index(nq, &wires, pattern));
            let a = init.enumerate_branches(&or, 64).unwrap();
            let b = init.enumerate_branches(&par, 64).unwrap();
            b.iter().all(|r| r.state.fidelity(&a[0].state) > 1.0 - 1e-12)
        };
        for one in 0..k {
            for t in 0..2usize {
                if !agree_on(((1 << (k - 1 - one)) << 1) | t) {
                    mismatches += 1;
                }
            }
        }
        if k >= 2 {
            let pattern = 0b11 << (k - 2) << 1;
            if !agree_on(pattern) {
                witnesses.push(k);
            }
        }
    }
    outcome(
        mismatches == 0 && witnesses == vec![2, 3, 4, 5, 6],
        format!("one-hot mismatches {mismatches}; non-one-hot witness (11 pattern) distinguishes k = {witnesses:?}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut depths = BTreeMap::new();
    let (mut worst, mut rounds_ok, mut ancilla_ok) = (1.0f64, true, true);
    for m in 1..=6usize {
        let targets: Vec<usize> = (1..=m).collect();
        let pool: Vec<usize> = (m + 1..=2 * m).collect();
        let nq = 2 * m + 1;
        let op = Op::Fanout { control: 0, targets: targets.clone(), mode: FanoutMode::Maf, pool: pool.clone() };
        let low = lowered(nq, &op);
        let met = metrics(&low);
        depths.insert(m, met.quantum_depth);
        rounds_ok &= met.maf_rounds == 1;
        let used: BTreeSet<usize> =
            low.instrs.iter().flat_map(|i| i.op.qubits()).filter(|q| pool.contains(q)).collect();
        ancilla_ok &= used.len() <= m;
        let reference = Op::Fanout { control: 0, targets, mode: FanoutMode::Sequential, pool: vec![] };
        for _ in 0..100 {
            let entries: Vec<(u64, Complex64)> = (0..1u64 << (m + 1))
                .map(|k| (k << m, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            let mut init = SimState::from_entries(nq, entries);
            init.normalize();
            let mut want = init.clone();
            apply_reference(&mut want, &reference).unwrap();
            for b in init.enumerate_branches(&low, 64).unwrap() {
                worst = worst.min(b.state.fidelity(&want));
            }
        }
    }
    let flat = depths.values().collect::<BTreeSet<_>>().len() == 1;
    outcome(
        worst >= 1.0 - 1e-10 && flat && rounds_ok && ancilla_ok,
        format!(
            "min branch fidelity {worst:.12}; depth by m {depths:?} (same for all m: {flat}); one round each: {rounds_ok}; ancillas <= m: {ancilla_ok}"
        ),
    )
}

fn stage_depth(c: &Circuit, stages: &[Stage]) -> usize {
    let mut sub = c.clone();
    sub.instrs.retain(|i| i.stage.is_some_and(|s| stages.contains(&s)));
    metrics(&sub).quantum_depth
}

fn criterion_6() -> Outcome {
    let seed = seed_from_env();
    let ds = [4usize, 8, 16, 32];
    let spec = |n: usize, d: usize| random_spec(&mut sqsp_core::sweep::point_rng(seed, n, d), n, d);
    let perm = |n, d, mode| stage_depth(&compile_sqsp(&spec(n, d), mode).unwrap(), &[Stage::Permutation]);

    let maf12: Vec<usize> = ds.iter().map(|&d| perm(12, d, Mode::Maf)).collect();
    let maf_flat = maf12.iter().all(|&x| x == maf12[0]);
    let uni12: Vec<usize> = ds.iter().map(|&d| perm(12, d, Mode::Unitary)).collect();
    let increasing = uni12.windows(2).all(|w| w[0] < w[1]);

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for n in 6..=14usize {
        for &d in &ds {
            xs.push((n * ceil_log2(d)) as f64);
            ys.push(perm(n, d, Mode::Unitary) as f64);
        }
    }
    let uni_fit = ols(&xs, &ys);

    let body = [Stage::Onehot, Stage::Permutation, Stage::Garbage];
    let ns: Vec<f64> = (6..=14).map(|n| n as f64).collect();
    let body_depth: Vec<f64> =
        (6..=14usize).map(|n| stage_depth(&compile_sqsp(&spec(n, 16), Mode::Maf).unwrap(), &body) as f64).collect();
    let body_fit = ols(&ns, &body_depth);

    outcome(
        maf_flat && increasing && uni_fit.r2 >= 0.98 && body_fit.r2 >= 0.98,
        format!(
            "n=12 maf permutation depth {maf12:?} (equal: {maf_flat}); unitary {uni12:?} (increasing: {increasing}); \
             unitary depth vs n*ceil(log d) R^2 {:.4} (slope {:.3}); maf stages 2-4 depth vs n at d=16 R^2 {:.4} {body_depth:?}",
            uni_fit.r2, uni_fit.slope, body_fit.r2
        ),
    )
}

fn criterion_7() -> Outcome {
    let t0 = Instant::now();
    let ns: Vec<usize> = (6..=20).collect();
    let ds = [4usize, 8, 16, 32, 64, 128, 256];
    let rows = sweep(&ns, &ds, &[Mode::Unitary, Mode::Maf], seed_from_env()).expect("sweep compiles");
    let secs = t0.elapsed().as_secs_f64();
    let totals: Vec<_> = rows.iter().filter(|r| r.stage == "total").collect();
    let mut fits = Vec::new();
    let mut fit_ok = true;
    for mode in [Mode::Unitary, Mode::Maf] {
        let pts: Vec<_> = totals.iter().filter(|r| r.mode == mode).collect();
        let xs: Vec<f64> = pts.iter().map(|r| (r.d * r.n) as f64).collect();
        let ys: Vec<f64> = pts.iter().map(|r| r.size as f64).collect();
        let f = ols_origin(&xs, &ys);
        let c_bound = pts.iter().map(|r| r.size as f64 / (r.d * r.n) as f64).fold(0.0, f64::max);
        fit_ok &= f.r2 >= 0.98;
        fits.push(format!("{}: c {:.2} (bound {:.2}), R^2 {:.4}", mode.name(), f.slope, c_bound, f.r2));
    }
    let round_violations =
        totals.iter().filter(|r| r.mode == Mode::Maf && r.maf_rounds > 4 * r.n + 2 * ceil_log2(r.d) + 4).count();
    let ancilla_violations = totals.iter().filter(|r| r.ancilla != (1 << ceil_log2(r.d)) + 3 * r.d).count();
    outcome(
        fit_ok && round_violations == 0 && ancilla_violations == 0 && secs < 600.0,
        format!(
            "size vs d*n {}; round budget violations {round_violations}; ancilla mismatches {ancilla_violations}; {} points in {secs:.1}s",
            fits.join("; "),
            totals.len()
        ),
    )
}

fn random_dynamic_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let nq = rng.gen_range(2..=6usize);
    let mut c = Circuit::new(nq);
    let mut cbits = Vec::new();
    for _ in 0..rng.gen_range(10..40) {
        let q = rng.gen_range(0..nq);
        match rng.gen_range(0..10) {
            0..=3 => {
                let g = match rng.gen_range(0..5) {
                    0 => Gate1::H,
                    1 => Gate1::T,
                    2 => Gate1::Ry(rng.gen_range(-3.0..3.0)),
                    3 => Gate1::Rz(rng.gen_range(-3.0..3.0)),
                    _ => Gate1::U(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
                };
                c.g1(g, q);
            }
            4..=5 => {
                let t = (q + rng.gen_range(1..nq)) % nq;
                c.cx(q, t);
            }
            6..=7 if cbits.len() < 10 => cbits.push(c.measure(q)),
            8 if !cbits.is_empty() => {
                let subset: Vec<usize> = cbits.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                let p = if rng.gen_bool(0.5) { Pauli::X } else { Pauli::Z };
                c.cond(subset, p, q);
            }
            _ => c.round(),
        }
    }
    c
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env() ^ 8);
    let (mut worst_sum, mut identical, mut measured) = (0.0f64, true, 0usize);
    for i in 0..50u64 {
        let c = random_dynamic_circuit(&mut rng);
        measured += c.count_measurements();
        let init = SimState::zero(c.num_qubits);
        let total: f64 = init.enumerate_branches(&c, 12).unwrap().iter().map(|b| b.branch_probability).sum();
        worst_sum = worst_sum.max((total - 1.0).abs());
        let a = init.run_circuit(&c, &OutcomePolicy::Sample(i)).unwrap();
        let b = init.run_circuit(&c, &OutcomePolicy::Sample(i)).unwrap();
        let bits = |s: &SimState| -> Vec<(u64, u64, u64)> {
            s.entries().iter().map(|(k, a)| (*k, a.re.to_bits(), a.im.to_bits())).collect()
        };
        identical &= a.outcomes == b.outcomes
            && bits(&a.state) == bits(&b.state)
            && a.branch_probability.to_bits() == b.branch_probability.to_bits();
    }
    outcome(
        worst_sum <= 1e-9 && identical,
        format!("50 circuits, {measured} measurements; max |sum p - 1| {worst_sum:.1e}; repeated seeds bit-identical: {identical}"),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 8] = [
        ("end-to-end correctness", criterion_1),
        ("grover-rudolph three-qubit example", criterion_2),
        ("gate identities", criterion_3),
        ("or-cx and parity-cx on one-hot inputs", criterion_4),
        ("constant-depth measured fan-out", criterion_5),
        ("depth scaling", criterion_6),
        ("size, rounds and ancilla scaling", criterion_7),
        ("simulator soundness", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = check();
        let tag = if r.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!r.pass);
        println!("{tag} {}: {name} [{:.1}s] {}", k + 1, t.elapsed().as_secs_f64(), r.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
