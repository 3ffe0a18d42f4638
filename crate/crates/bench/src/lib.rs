//! Benchmark groups for compilation, lowering and simulation.
//!
//! Specs come from the same seeded generator as the resource sweep, so a
//! benchmark point and a CSV row with the same `(n, d)` share their input.

use criterion::{black_box, BenchmarkId, Criterion, Throughput};

use sqsp_core::sweep::{point_rng, random_spec};
use sqsp_core::verify::{verify_circuit, Method};
use sqsp_core::{compile_composite, compile_sqsp, lower, Mode, SparseStateSpec};

fn spec(n: usize, d: usize) -> SparseStateSpec {
    random_spec(&mut point_rng(0, n, d), n, d)
}

/// End-to-end compilation at `n = 12` across sparsities.
pub fn compile(c: &mut Criterion) {
    let mut g = c.benchmark_group("compile");
    for d in [4, 16, 64, 256] {
        let s = spec(12, d);
        g.throughput(Throughput::Elements(d as u64));
        for mode in [Mode::Unitary, Mode::Maf] {
            g.bench_with_input(BenchmarkId::new(mode.name(), d), &s, |b, s| {
                b.iter(|| compile_sqsp(black_box(s), mode).unwrap())
            });
        }
    }
    g.finish();
}

/// Lowering of composite circuits to native gates.
pub fn lowering(c: &mut Criterion) {
    let mut g = c.benchmark_group("lower");
    for n in [8, 16] {
        let composite = compile_composite(&spec(n, 32), Mode::Unitary).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &composite, |b, circ| {
            b.iter(|| lower(black_box(circ)).unwrap())
        });
    }
    g.finish();
}

/// Sampled verification of small compiled circuits.
pub fn simulate(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify");
    for (n, d) in [(4, 3), (6, 5), (8, 6)] {
        let s = spec(n, d);
        for mode in [Mode::Unitary, Mode::Maf] {
            let circ = compile_sqsp(&s, mode).unwrap();
            g.bench_with_input(BenchmarkId::new(mode.name(), format!("n{n}d{d}")), &circ, |b, circ| {
                b.iter(|| verify_circuit(&s, circ, &Method::Seeds(vec![0])).unwrap())
            });
        }
    }
    g.finish();
}
