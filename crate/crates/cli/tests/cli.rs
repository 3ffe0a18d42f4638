use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sqsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqsp")).args(args).env_remove("SQSP_SEED").output().expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn write_spec(dir: &TempDir, name: &str, n: usize, entries: &[(&str, &str)]) -> String {
    let list: Vec<String> = entries.iter().map(|(a, b)| format!("[\"{a}\", \"{b}\"]")).collect();
    let p = path(dir, name);
    fs::write(&p, format!("{{\"n\": {n}, \"entries\": [{}]}}", list.join(", "))).unwrap();
    p
}

fn eight_sparse(dir: &TempDir) -> String {
    let bits = ["01001", "01110", "10001", "10010", "10111", "11010", "11101", "11110"];
    let amp = format!("{}+0.0i", (1.0f64 / 8.0).sqrt());
    let entries: Vec<(&str, &str)> = bits.iter().map(|b| (amp.as_str(), *b)).collect();
    write_spec(dir, "eight.json", 5, &entries)
}

fn four_sparse(dir: &TempDir) -> String {
    write_spec(
        dir,
        "four.json",
        5,
        &[("0.5+0.0i", "00011"), ("0.0-0.5i", "01100"), ("-0.5+0.0i", "10101"), ("0.5+0.0i", "11110")],
    )
}

#[test]
fn compile_single_entry_gives_x_gates() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "one.json", 4, &[("1.0+0.0i", "1011")]);
    let out = path(&dir, "one.sqc");
    let o = sqsp(&["compile", "--input", &spec, "--mode", "unitary", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let ops: Vec<&str> =
        text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("qubits") && !l.starts_with("cbits")).collect();
    assert_eq!(ops, ["x q0", "x q2", "x q3"]);
}

#[test]
fn compile_writes_metrics_for_eight_sparse_mapping() {
    let dir = TempDir::new().unwrap();
    let spec = eight_sparse(&dir);
    let (out, met) = (path(&dir, "c.sqc"), path(&dir, "m.json"));
    let o = sqsp(&["compile", "--input", &spec, "--mode", "maf", "--out", &out, "--metrics", &met]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&met).unwrap()).unwrap();
    assert!(m["per_stage"]["permutation"]["size"].as_u64().unwrap() > 0);
    assert!(m["maf_rounds"].as_u64().unwrap() > 0);
    let c = sqsp_core::parse_circuit(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(serde_json::to_value(sqsp_core::metrics(&c)).unwrap(), m);
}

#[test]
fn malformed_json_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let spec = path(&dir, "bad.json");
    fs::write(&spec, "{\"n\": 3, \"entries\": [").unwrap();
    let (out, met) = (path(&dir, "c.sqc"), path(&dir, "m.json"));
    let o = sqsp(&["compile", "--input", &spec, "--out", &out, "--metrics", &met]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!Path::new(&out).exists() && !Path::new(&met).exists());
}

#[test]
fn invalid_spec_names_the_invariant() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "dup.json", 2, &[("0.6+0.0i", "01"), ("0.8+0.0i", "01")]);
    let o = sqsp(&["compile", "--input", &spec, "--out", &path(&dir, "c.sqc")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate bitstring"));
    let spec = write_spec(&dir, "norm.json", 2, &[("0.6+0.0i", "01"), ("0.6+0.0i", "10")]);
    let o = sqsp(&["compile", "--input", &spec, "--out", &path(&dir, "c.sqc")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("normalized"));
}

#[test]
fn verify_passes_in_both_modes() {
    let dir = TempDir::new().unwrap();
    let spec = eight_sparse(&dir);
    for mode in ["unitary", "maf"] {
        let o = sqsp(&["verify", "--input", &spec, "--mode", mode, "--seeds", "4"]);
        assert!(o.status.success(), "{mode}: {}", String::from_utf8_lossy(&o.stdout));
        assert!(String::from_utf8_lossy(&o.stdout).contains("min fidelity"));
    }
}

#[test]
fn verify_exhaustive_maf() {
    let dir = TempDir::new().unwrap();
    let spec = four_sparse(&dir);
    let report = path(&dir, "r.json");
    let o = sqsp(&["verify", "--input", &spec, "--mode", "maf", "--exhaustive", "--report", &report]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["exhaustive"], true);
    assert!((r["total_probability"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(r["runs"].as_array().unwrap().len() > 1);
}

#[test]
fn corrupted_circuit_exits_3() {
    let dir = TempDir::new().unwrap();
    let spec = four_sparse(&dir);
    let out = path(&dir, "c.sqc");
    assert!(sqsp(&["compile", "--input", &spec, "--out", &out]).status.success());
    let mut text = fs::read_to_string(&out).unwrap();
    text.push_str("x q1\n");
    fs::write(&out, text).unwrap();
    let o = sqsp(&["verify", "--input", &spec, "--circuit", &out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("worst branch"));
}

#[test]
fn bench_writes_ordered_csv_and_fits() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "b.csv");
    let o = sqsp(&["bench", "--n-range", "6:8", "--d-set", "1,4,8", "--mode", "both", "--csv", &csv]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,d,mode,stage,size,quantum_depth,maf_rounds,ancilla,wall_time_ms"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3 * 3 * 2 * 5);
    assert_eq!(&rows[0][..4], ["6", "1", "unitary", "total"]);
    assert_eq!(&rows.last().unwrap()[..4], ["8", "8", "maf", "garbage"]);
    for r in rows.iter().filter(|r| r[1] == "1" && r[3] == "total") {
        assert!(r[4].parse::<usize>().unwrap() <= 8);
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("permutation depth vs n (unitary, d=8)"));
    assert!(stdout.contains("permutation depth vs d (maf, n=7)"));
}

#[test]
fn bench_rejects_bad_ranges() {
    for (range, dset) in [("8:6", "4"), ("x", "4"), ("4:6", "0"), ("4:6", "a,b")] {
        let o = sqsp(&["bench", "--n-range", range, "--d-set", dset]);
        assert_eq!(o.status.code(), Some(2), "{range} {dset}");
    }
}

#[test]
fn seed_variable_changes_bench_specs() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_sqsp"))
            .args(["bench", "--n-range", "10:10", "--d-set", "16", "--mode", "unitary"])
            .env("SQSP_SEED", seed)
            .output()
            .unwrap()
    };
    let strip = |o: Output| -> Vec<String> {
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').map_or(l, |x| x.0).to_string())
            .collect()
    };
    assert_eq!(strip(run("3")), strip(run("3")));
    assert_ne!(strip(run("3")), strip(run("4")));
}
