//! Random specs, resource sweeps and least-squares fits.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{metrics, Stage};
use crate::pipeline::{compile_sqsp, Mode, PipelineError};
use crate::state::SparseStateSpec;

/// Environment variable overriding the default seed.
pub const SEED_VAR: &str = "SQSP_SEED";

pub const CSV_HEADER: &str = "n,d,mode,stage,size,quantum_depth,maf_rounds,ancilla,wall_time_ms";

/// Seed from `SQSP_SEED`, or 0 when unset or unparsable.
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_VAR).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

/// A spec with `d` distinct uniformly drawn bitstrings and random complex
/// amplitudes.
pub fn random_spec(rng: &mut impl Rng, n: usize, d: usize) -> SparseStateSpec {
    assert!((1..=63).contains(&n) && d as u128 <= 1u128 << n, "d = {d} does not fit in {n} qubits");
    let mut seen = std::collections::HashSet::with_capacity(d);
    let mut entries = Vec::with_capacity(d);
    while entries.len() < d {
        let q = rng.gen_range(0..1u64 << n);
        if seen.insert(q) {
            let a = loop {
                let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if a.norm() > 1e-3 {
                    break a;
                }
            };
            entries.push((q, a));
        }
    }
    let s = entries.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
    entries.iter_mut().for_each(|(_, a)| *a /= s);
    SparseStateSpec::new(n, entries).expect("generated spec is valid")
}

/// RNG for sweep point `(n, d)`, shared by both modes.
pub fn point_rng(seed: u64, n: usize, d: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | d as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub mode: Mode,
    /// A stage name or `total`.
    pub stage: String,
    pub size: usize,
    pub quantum_depth: usize,
    pub maf_rounds: usize,
    pub ancilla: usize,
    pub wall_time_ms: f64,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.3}",
            self.n,
            self.d,
            self.mode.name(),
            self.stage,
            self.size,
            self.quantum_depth,
            self.maf_rounds,
            self.ancilla,
            self.wall_time_ms
        )
    }
}

/// Compiles one spec and reports a `total` row followed by one row per stage.
pub fn bench_spec(spec: &SparseStateSpec, mode: Mode) -> Result<Vec<BenchRow>, PipelineError> {
    let t0 = Instant::now();
    let c = compile_sqsp(spec, mode)?;
    let m = metrics(&c);
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    let row = |stage: &str, size, quantum_depth, maf_rounds| BenchRow {
        n: spec.n(),
        d: spec.d(),
        mode,
        stage: stage.to_string(),
        size,
        quantum_depth,
        maf_rounds,
        ancilla: m.ancilla_count,
        wall_time_ms: ms,
    };
    let mut rows = vec![row("total", m.size, m.quantum_depth, m.maf_rounds)];
    for st in Stage::ALL {
        let s = m.per_stage.get(&st).cloned().unwrap_or_default();
        rows.push(row(st.name(), s.size, s.quantum_depth, s.maf_rounds));
    }
    Ok(rows)
}

/// Rows for every `(n, d, mode)` with `d <= 2^n`, in `(n, d, mode, stage)`
/// order. Points compile on all available cores.
pub fn sweep(ns: &[usize], ds: &[usize], modes: &[Mode], seed: u64) -> Result<Vec<BenchRow>, PipelineError> {
    let mut points = Vec::new();
    for &n in ns {
        for &d in ds {
            if n < 64 && d > 1usize << n {
                continue;
            }
            for &mode in modes {
                points.push((n, d, mode));
            }
        }
    }
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(points.len().max(1));
    let mut results: Vec<Option<Result<Vec<BenchRow>, PipelineError>>> = (0..points.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        for (w, chunk) in results.chunks_mut(points.len().div_ceil(workers).max(1)).enumerate() {
            let points = &points;
            let base = w * points.len().div_ceil(workers).max(1);
            s.spawn(move || {
                for (off, slot) in chunk.iter_mut().enumerate() {
                    let (n, d, mode) = points[base + off];
                    let spec = random_spec(&mut point_rng(seed, n, d), n, d);
                    *slot = Some(bench_spec(&spec, mode));
                }
            });
        }
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r.expect("every point visited")?);
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
///
/// `r2` is 1 when `y` is constant and fitted exactly.
pub fn ols(xs: &[f64], ys: &[f64]) -> Fit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need two points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Fit { intercept, slope, r2 }
}

/// Least squares through the origin, `y = slope * x`.
pub fn ols_origin(xs: &[f64], ys: &[f64]) -> Fit {
    assert_eq!(xs.len(), ys.len());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = sxy / sxx;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    Fit { intercept: 0.0, slope, r2: 1.0 - ss_res / ss_tot }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 + 2.0 * x).collect();
        let f = ols(&xs, &ys);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert_eq!(ols(&xs, &[5.0; 4]).r2, 1.0);
        let g = ols_origin(&xs, &[2.0, 4.0, 6.0, 8.0]);
        assert!((g.slope - 2.0).abs() < 1e-12 && (g.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_specs_are_reproducible() {
        let a = random_spec(&mut point_rng(4, 8, 6), 8, 6);
        let b = random_spec(&mut point_rng(4, 8, 6), 8, 6);
        assert_eq!(a, b);
        assert_ne!(a, random_spec(&mut point_rng(5, 8, 6), 8, 6));
        let full = random_spec(&mut point_rng(0, 3, 8), 3, 8);
        assert_eq!(full.d(), 8);
    }

    #[test]
    fn sweep_rows_are_ordered() {
        let rows = sweep(&[3, 4], &[1, 4, 16], &[Mode::Unitary, Mode::Maf], 0).unwrap();
        // n = 3 skips d = 16; five rows per point.
        assert_eq!(rows.len(), 5 * 2 * 5);
        let keys: Vec<(usize, usize, &str)> = rows.iter().step_by(5).map(|r| (r.n, r.d, r.mode.name())).collect();
        assert_eq!(keys[0], (3, 1, "unitary"));
        assert_eq!(keys[1], (3, 1, "maf"));
        assert_eq!(keys.last().unwrap(), &(4, 16, "maf"));
        let csv = to_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }
}
