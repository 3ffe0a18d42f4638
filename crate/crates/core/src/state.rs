//! Sparse target states and dense reference vectors.
//!
//! Bit order: the leftmost character of a bitstring is qubit 0, which is the
//! most significant bit of the dense index.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

/// Tolerance on the squared norm of a target state.
pub const NORM_TOL: f64 = 1e-9;
/// Largest norm deviation that `renormalize` is allowed to absorb.
pub const RENORMALIZE_LIMIT: f64 = 1e-3;
/// Magnitudes below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("duplicate bitstring {0}")]
    DuplicateBitstring(String),
    #[error("state is not normalized (|norm^2 - 1| = {0:e})")]
    NotNormalized(f64),
    #[error("bitstring {bits} has length {len}, expected {n}")]
    BadLength { bits: String, len: usize, n: usize },
}

/// A normalized sparse state `sum_i alpha_i |q_i>` on `n` qubits.
///
/// Entries keep the order they were given in; that order fixes the index `i`
/// used by the compiler.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseStateSpec {
    n: usize,
    entries: Vec<(u64, Complex64)>,
}

impl SparseStateSpec {
    /// Builds a spec from `(basis index, amplitude)` pairs.
    pub fn new(n: usize, entries: Vec<(u64, Complex64)>) -> Result<Self, StateError> {
        Self::build(n, entries, false)
    }

    /// Like [`SparseStateSpec::new`] but rescales when the norm is off by at
    /// most [`RENORMALIZE_LIMIT`].
    pub fn new_renormalized(n: usize, entries: Vec<(u64, Complex64)>) -> Result<Self, StateError> {
        Self::build(n, entries, true)
    }

    fn build(n: usize, mut entries: Vec<(u64, Complex64)>, renormalize: bool) -> Result<Self, StateError> {
        if n == 0 || n > 63 {
            return Err(StateError::MalformedInput(format!("n = {n} out of range 1..=63")));
        }
        if entries.is_empty() {
            return Err(StateError::MalformedInput("no entries".into()));
        }
        let mut seen = HashSet::new();
        for &(idx, amp) in &entries {
            if idx >> n != 0 {
                return Err(StateError::MalformedInput(format!("index {idx} does not fit in {n} qubits")));
            }
            if !seen.insert(idx) {
                return Err(StateError::DuplicateBitstring(index_to_bits(idx, n)));
            }
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(StateError::MalformedInput("non-finite amplitude".into()));
            }
            if amp.norm() < ZERO_TOL {
                return Err(StateError::MalformedInput(format!("zero amplitude on {}", index_to_bits(idx, n))));
            }
        }
        let norm_sq: f64 = entries.iter().map(|(_, a)| a.norm_sqr()).sum();
        let dev = (norm_sq - 1.0).abs();
        if dev > NORM_TOL {
            if !renormalize || dev > RENORMALIZE_LIMIT {
                return Err(StateError::NotNormalized(dev));
            }
            let s = norm_sq.sqrt();
            for (_, a) in entries.iter_mut() {
                *a /= s;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nonzero amplitudes.
    pub fn d(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u64, Complex64)] {
        &self.entries
    }

    pub fn bitstring(&self, i: usize) -> String {
        index_to_bits(self.entries[i].0, self.n)
    }

    /// Bit `j` (qubit `j`) of the `i`-th bitstring.
    pub fn bit(&self, i: usize, j: usize) -> bool {
        (self.entries[i].0 >> (self.n - 1 - j)) & 1 == 1
    }

    pub fn to_dense(&self) -> DenseState {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << self.n];
        for &(idx, a) in &self.entries {
            amps[idx as usize] = a;
        }
        DenseState { n: self.n, amps }
    }

    /// The `2^ceil(log2 d)`-dimensional vector `sum_i alpha_i |i>`.
    pub fn compact_amplitudes(&self) -> Vec<Complex64> {
        let nprime = ceil_log2(self.d());
        let mut v = vec![Complex64::new(0.0, 0.0); 1usize << nprime];
        for (i, &(_, a)) in self.entries.iter().enumerate() {
            v[i] = a;
        }
        v
    }
}

/// `ceil(log2 x)` with `ceil_log2(1) == 0`.
pub fn ceil_log2(x: usize) -> usize {
    assert!(x > 0);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

pub fn index_to_bits(idx: u64, n: usize) -> String {
    (0..n).map(|j| if (idx >> (n - 1 - j)) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn bits_to_index(bits: &str) -> Option<u64> {
    if bits.is_empty() || bits.len() > 63 {
        return None;
    }
    bits.chars().try_fold(0u64, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    n: usize,
    #[serde(default)]
    renormalize: bool,
    entries: Vec<(AmpJson, String)>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AmpJson {
    Text(String),
    Real(f64),
}

/// Parses the JSON form `{"n": .., "renormalize": .., "entries": [["RE+IMi", "bits"], ..]}`.
pub fn parse_state_spec(json: &str) -> Result<SparseStateSpec, StateError> {
    let raw: SpecJson = serde_json::from_str(json).map_err(|e| StateError::MalformedInput(e.to_string()))?;
    let mut entries = Vec::with_capacity(raw.entries.len());
    for (amp, bits) in raw.entries {
        if bits.len() != raw.n {
            return Err(StateError::BadLength { len: bits.len(), n: raw.n, bits });
        }
        let idx = bits_to_index(&bits).ok_or_else(|| StateError::MalformedInput(format!("bad bitstring {bits:?}")))?;
        let a = match amp {
            AmpJson::Real(x) => Complex64::new(x, 0.0),
            AmpJson::Text(s) => parse_complex(&s)?,
        };
        entries.push((idx, a));
    }
    SparseStateSpec::build(raw.n, entries, raw.renormalize)
}

/// Serializes back to the JSON input form.
pub fn spec_to_json(spec: &SparseStateSpec) -> String {
    let entries: Vec<serde_json::Value> = spec
        .entries
        .iter()
        .map(|&(idx, a)| serde_json::json!([format_complex(a), index_to_bits(idx, spec.n)]))
        .collect();
    serde_json::json!({ "n": spec.n, "entries": entries }).to_string()
}

fn format_complex(a: Complex64) -> String {
    if a.im < 0.0 || (a.im == 0.0 && a.im.is_sign_negative()) {
        format!("{}-{}i", a.re, -a.im)
    } else {
        format!("{}+{}i", a.re, a.im)
    }
}

/// Parses `"RE"`, `"IMi"` or `"RE+IMi"` / `"RE-IMi"`.
pub fn parse_complex(s: &str) -> Result<Complex64, StateError> {
    let bad = || StateError::MalformedInput(format!("bad amplitude {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let parse_im = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => x.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, parse_im(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, parse_im(body)?)),
    }
}

/// A dense state vector over `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl DenseState {
    pub fn new(n: usize, amps: Vec<Complex64>) -> Self {
        assert_eq!(amps.len(), 1usize << n);
        Self { n, amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &DenseState) -> Complex64 {
        assert_eq!(self.n, other.n);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &DenseState, b: &DenseState) -> f64 {
    a.inner(b).norm_sqr()
}

/// Dense vector of the spec on its own `n` qubits.
pub fn embed(spec: &SparseStateSpec) -> DenseState {
    spec.to_dense()
}
