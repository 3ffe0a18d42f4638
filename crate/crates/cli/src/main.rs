//! `sqsp`: compile, verify and benchmark sparse state preparation circuits.
//!
//! Exit codes: 0 success, 2 input error, 3 verification failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use sqsp_core::sweep::{self, BenchRow};
use sqsp_core::verify::{verify_circuit, Method, VerifyReport};
use sqsp_core::{compile_sqsp, metrics, parse_circuit, parse_state_spec, serialize, Mode, SparseStateSpec};

#[derive(Parser)]
#[command(name = "sqsp", version, about = "Sparse quantum state preparation compiler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a state spec to a native circuit.
    Compile(CompileArgs),
    /// Simulate a compiled circuit and compare it with its target state.
    Verify(VerifyArgs),
    /// Compile random specs over a grid and report resource counts.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CompileArgs {
    /// State spec JSON.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "unitary")]
    mode: Mode,
    /// Circuit text output.
    #[arg(long)]
    out: PathBuf,
    /// Metrics JSON output.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// State spec JSON.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "unitary")]
    mode: Mode,
    /// Verify this circuit file instead of compiling the spec.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Number of sampled seeds, starting at `SQSP_SEED`.
    #[arg(long, conflicts_with = "exhaustive")]
    seeds: Option<usize>,
    /// Simulate every measurement branch.
    #[arg(long)]
    exhaustive: bool,
    /// Refuse exhaustive runs of circuits with more measurements than this.
    #[arg(long, default_value_t = 64)]
    max_measurements: usize,
    /// Write the full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeSet {
    Unitary,
    Maf,
    Both,
}

impl ModeSet {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModeSet::Unitary => vec![Mode::Unitary],
            ModeSet::Maf => vec![Mode::Maf],
            ModeSet::Both => vec![Mode::Unitary, Mode::Maf],
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Inclusive qubit range `a:b`.
    #[arg(long)]
    n_range: String,
    /// Comma-separated sparsities.
    #[arg(long, default_value = "4,8,16")]
    d_set: String,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeSet,
    /// CSV output; printed to stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verify(_) => 3,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<SparseStateSpec, CliError> {
    parse_state_spec(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn compile(args: &CompileArgs) -> Result<(), CliError> {
    let spec = load_spec(&args.input)?;
    let c = compile_sqsp(&spec, args.mode).map_err(input)?;
    let m = metrics(&c);
    write(&args.out, &serialize(&c))?;
    if let Some(p) = &args.metrics {
        write(p, &serde_json::to_string_pretty(&m).expect("metrics serialize"))?;
    }
    println!(
        "{} wires, size {}, depth {}, rounds {}, ancillas {}",
        c.num_qubits, m.size, m.quantum_depth, m.maf_rounds, m.ancilla_count
    );
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let spec = load_spec(&args.input)?;
    let circuit = match &args.circuit {
        Some(p) => parse_circuit(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => compile_sqsp(&spec, args.mode).map_err(input)?,
    };
    let base = sweep::seed_from_env();
    let method = match (args.exhaustive, args.seeds) {
        (true, _) => Method::Exhaustive { limit: args.max_measurements },
        (false, Some(k)) => Method::Seeds((base..base + k as u64).collect()),
        (false, None) => Method::auto(base, 20),
    };
    let report = verify_circuit(&spec, &circuit, &method).map_err(input)?;
    if let Some(p) = &args.report {
        write(p, &report.to_json())?;
    }
    print_report(&report);
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Verify(format!("verification failed; worst branch outcomes {:?}", report.worst_outcomes)))
    }
}

fn print_report(r: &VerifyReport) {
    let how = if r.exhaustive { "exhaustive" } else { "sampled" };
    println!("runs: {} ({how})", r.runs.len());
    println!("min fidelity: {:.15}", r.min_fidelity);
    println!("ancilla residual: {:e}", r.max_ancilla_residual);
    if r.exhaustive {
        println!("total probability: {:.15}", r.total_probability);
    }
}

fn parse_range(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Input(format!("invalid n range {s:?}; expected a:b with 1 <= a <= b <= 63"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b || b > 63 {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn parse_d_set(s: &str) -> Result<Vec<usize>, CliError> {
    let ds: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().ok().filter(|&d| d >= 1))
        .collect::<Option<_>>()
        .ok_or_else(|| CliError::Input(format!("invalid d set {s:?}; expected positive integers")))?;
    Ok(ds)
}

fn print_fits(rows: &[BenchRow], ns: &[usize], ds: &[usize], modes: &[Mode], out: &mut dyn std::io::Write) {
    let perm: Vec<&BenchRow> = rows.iter().filter(|r| r.stage == "permutation").collect();
    let mut fit = |label: String, pts: Vec<(f64, f64)>| {
        if pts.len() >= 2 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let f = sweep::ols(&xs, &ys);
            writeln!(out, "{label}: slope {:.4}, intercept {:.4}, R^2 {:.4}", f.slope, f.intercept, f.r2).unwrap();
        }
    };
    for &d in ds {
        let pts =
            perm.iter().filter(|r| r.mode == Mode::Unitary && r.d == d).map(|r| (r.n as f64, r.quantum_depth as f64));
        fit(format!("permutation depth vs n (unitary, d={d})"), pts.collect());
    }
    for &n in ns {
        for &mode in modes {
            let pts = perm.iter().filter(|r| r.mode == mode && r.n == n).map(|r| (r.d as f64, r.quantum_depth as f64));
            fit(format!("permutation depth vs d ({}, n={n})", mode.name()), pts.collect());
        }
    }
}

fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let ns = parse_range(&args.n_range)?;
    let ds = parse_d_set(&args.d_set)?;
    let modes = args.mode.modes();
    let rows = sweep::sweep(&ns, &ds, &modes, sweep::seed_from_env()).map_err(input)?;
    let csv = sweep::to_csv(&rows);
    match &args.csv {
        Some(p) => {
            write(p, &csv)?;
            print_fits(&rows, &ns, &ds, &modes, &mut std::io::stdout());
        }
        None => {
            print!("{csv}");
            print_fits(&rows, &ns, &ds, &modes, &mut std::io::stderr());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile(a) => compile(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
