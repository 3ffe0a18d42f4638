//! The four-stage sparse state preparation compiler.
//!
//! Stage 1 prepares `sum_i alpha_i |i>` on the first `n' = ceil(log2 d)` wires
//! of `A`. Stage 2 writes the one-hot code `|e_i>` into `B`. Stage 3 rewrites
//! `A` from `|i>` to `|q_i>` column by column, controlled on `B`. Stage 4
//! records the path of `q_i` through its branch nodes in `C`, uses it to
//! clear `B`, and then uncomputes `C`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{lower, Circuit, CircuitError, FanoutMode, Op, Register, Stage};
use crate::gqsp::{emit_grover_rudolph, AmplitudeBst};
use crate::state::{ceil_log2, SparseStateSpec};
use crate::synth::tree_copy_pairs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Unitary,
    Maf,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Unitary => "unitary",
            Mode::Maf => "maf",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unitary" => Ok(Mode::Unitary),
            "maf" => Ok(Mode::Maf),
            other => Err(format!("unknown mode {other:?} (expected unitary or maf)")),
        }
    }
}

/// How stage 2 drives its CSWAPs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OnehotMode {
    /// Every CSWAP of a column is controlled by `A(j)` itself.
    Baseline,
    /// `A(j)` is copied into `C` by a CNOT tree and the CSWAPs run in parallel.
    Copy,
    /// As `Copy`, with the copies made and cleared by measured fan-outs.
    Maf,
}

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("register {name} has {have} wires, needs {need}")]
    RegisterTooSmall { name: &'static str, need: usize, have: usize },
}

/// Wire spans of the four registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    pub a: Register,
    pub b: Register,
    pub c: Register,
    pub d: Register,
}

impl RegisterLayout {
    /// Adds `A` (n), `B` (2^ceil(log2 d)), `C` (2d) and `D` (d) to `c`.
    pub fn allocate(c: &mut Circuit, n: usize, d: usize) -> Self {
        let a = c.add_register("A", n);
        let b = c.add_register("B", 1 << ceil_log2(d));
        let cr = c.add_register("C", 2 * d);
        let dr = c.add_register("D", d);
        Self { a, b, c: cr, d: dr }
    }

    pub fn total(&self) -> usize {
        self.a.len + self.b.len + self.c.len + self.d.len
    }
}

/// Bit `j` of `i` read as an `nprime`-bit number, zero past `nprime`.
fn index_bit(i: usize, j: usize, nprime: usize) -> bool {
    j < nprime && (i >> (nprime - 1 - j)) & 1 == 1
}

/// Appends stage 2: `|i>|0_B> -> |i>|e_i>` for `i < 2^nprime`.
pub fn emit_onehot(
    c: &mut Circuit,
    layout: &RegisterLayout,
    nprime: usize,
    mode: OnehotMode,
) -> Result<(), PipelineError> {
    let need_b = 1usize << nprime;
    if layout.b.len < need_b {
        return Err(PipelineError::RegisterTooSmall { name: "B", need: need_b, have: layout.b.len });
    }
    let copies = (1usize << nprime.saturating_sub(1)).saturating_sub(1);
    if mode != OnehotMode::Baseline && layout.c.len < copies {
        return Err(PipelineError::RegisterTooSmall { name: "C", need: copies, have: layout.c.len });
    }
    c.x(layout.b.wire(0));
    for j in 0..nprime {
        let ctl = layout.a.wire(j);
        let width = 1usize << j;
        let half = 1usize << (nprime - j - 1);
        let m = width - 1;
        let copy_wires: Vec<usize> = (0..m).map(|t| layout.c.wire(t)).collect();
        let mut pool: Vec<usize> = (m..layout.c.len).map(|t| layout.c.wire(t)).collect();
        pool.extend(layout.d.wires());
        let pairs = tree_copy_pairs(ctl, &copy_wires);
        let fanout = Op::Fanout { control: ctl, targets: copy_wires.clone(), mode: FanoutMode::Maf, pool };
        let controls: Vec<usize> = match mode {
            OnehotMode::Baseline => vec![ctl; width],
            _ => std::iter::once(ctl).chain(copy_wires.iter().copied()).collect(),
        };
        match mode {
            OnehotMode::Baseline => {}
            OnehotMode::Copy => pairs.iter().for_each(|&(s, t)| c.cx(s, t)),
            OnehotMode::Maf if m > 0 => c.push(fanout.clone()),
            OnehotMode::Maf => {}
        }
        for (i, &q) in controls.iter().enumerate() {
            let lo = layout.b.wire(2 * i * half);
            let hi = layout.b.wire(2 * i * half + half);
            c.push(Op::Cswap { c: q, a: lo, b: hi });
        }
        match mode {
            OnehotMode::Baseline => {}
            OnehotMode::Copy => pairs.iter().rev().for_each(|&(s, t)| c.cx(s, t)),
            OnehotMode::Maf if m > 0 => c.push(fanout),
            OnehotMode::Maf => {}
        }
    }
    Ok(())
}

/// Indices `i` whose column `j` must flip: bit `j` of `i` differs from bit
/// `j` of `q_i`.
pub fn control_set(spec: &SparseStateSpec, j: usize) -> Vec<usize> {
    let nprime = ceil_log2(spec.d());
    (0..spec.d()).filter(|&i| index_bit(i, j, nprime) != spec.bit(i, j)).collect()
}

/// Appends stage 3: `sum alpha_i |i>|e_i> -> sum alpha_i |q_i>|e_i>`.
pub fn emit_permutation(
    c: &mut Circuit,
    layout: &RegisterLayout,
    spec: &SparseStateSpec,
    mode: Mode,
) -> Result<(), PipelineError> {
    let cpool = layout.c.wires();
    for j in 0..spec.n() {
        let cq = control_set(spec, j);
        let target = layout.a.wire(j);
        let b = |set: &[usize]| set.iter().map(|&i| layout.b.wire(i)).collect::<Vec<_>>();
        match mode {
            _ if cq.is_empty() => {}
            Mode::Unitary => c.push(Op::OrCx { controls: b(&cq), target, pool: cpool.clone() }),
            Mode::Maf if cq.len() >= 2 => {
                c.push(Op::ParCx { controls: b(&cq), target, maf: true, pool: cpool[..cq.len()].to_vec() })
            }
            Mode::Maf => c.cx(layout.b.wire(cq[0]), target),
        }
    }
    Ok(())
}

/// A node of the bitstring trie with two children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchNode {
    /// Depth of the node, which is also the bit it splits on.
    pub layer: usize,
    /// The first `layer` bits shared by every string below the node.
    pub prefix: u64,
    /// Nearest branch ancestor, 1-based; 0 for the topmost branch.
    pub parent: usize,
    /// Child of `parent` this node hangs under (`true` = right, bit 1).
    pub side: bool,
}

/// Branch nodes of the trie over the target bitstrings.
///
/// Branches are numbered from 1 in layer order and by prefix within a layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathBst {
    n: usize,
    branches: Vec<BranchNode>,
    per_layer: Vec<usize>,
    /// Per bitstring: deepest branch on its path and the side taken there.
    lowest: Vec<Option<(usize, bool)>>,
    paths: Vec<u64>,
}

impl PathBst {
    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    /// Branch node `k` (1-based).
    pub fn branch(&self, k: usize) -> &BranchNode {
        &self.branches[k - 1]
    }

    pub fn branches(&self) -> &[BranchNode] {
        &self.branches
    }

    /// `b(j)`: branch nodes in layer `j`.
    pub fn b(&self, j: usize) -> usize {
        self.per_layer[j]
    }

    /// `PB(k)`.
    pub fn pb(&self, k: usize) -> usize {
        self.branch(k).parent
    }

    /// `LB(i)` and the side `q_i` takes there, or `None` when `d = 1`.
    pub fn lb(&self, i: usize) -> Option<(usize, bool)> {
        self.lowest[i]
    }

    /// `f(q_i, k)`: `(true, false)` if `q_i` goes left at branch `k`,
    /// `(false, true)` if right, `(false, false)` if it does not pass `k`.
    pub fn f(&self, i: usize, k: usize) -> (bool, bool) {
        let br = self.branch(k);
        let q = self.paths[i];
        let through = br.layer == 0 || q >> (self.n - br.layer) == br.prefix;
        if !through {
            return (false, false);
        }
        let right = (q >> (self.n - 1 - br.layer)) & 1 == 1;
        (!right, right)
    }
}

pub fn build_path_bst(spec: &SparseStateSpec) -> PathBst {
    let n = spec.n();
    let paths: Vec<u64> = spec.entries().iter().map(|&(q, _)| q).collect();
    let prefix = |q: u64, len: usize| if len == 0 { 0 } else { q >> (n - len) };
    let mut index: BTreeMap<(usize, u64), usize> = BTreeMap::new();
    let mut branches = Vec::new();
    let mut per_layer = Vec::with_capacity(n);
    for j in 0..n {
        let before = branches.len();
        let mut seen: BTreeMap<u64, (bool, bool)> = BTreeMap::new();
        for &q in &paths {
            let e = seen.entry(prefix(q, j)).or_default();
            if (q >> (n - 1 - j)) & 1 == 1 {
                e.1 = true;
            } else {
                e.0 = true;
            }
        }
        for (p, _) in seen.into_iter().filter(|(_, (l, r))| *l && *r) {
            let (parent, side) = (0..j)
                .rev()
                .find_map(|jp| {
                    let key = (jp, if jp == 0 { 0 } else { p >> (j - jp) });
                    index.get(&key).map(|&k| (k, (p >> (j - jp - 1)) & 1 == 1))
                })
                .unwrap_or((0, false));
            branches.push(BranchNode { layer: j, prefix: p, parent, side });
            index.insert((j, p), branches.len());
        }
        per_layer.push(branches.len() - before);
    }
    let lowest = paths
        .iter()
        .map(|&q| (0..n).rev().find_map(|j| index.get(&(j, prefix(q, j))).map(|&k| (k, (q >> (n - 1 - j)) & 1 == 1))))
        .collect();
    PathBst { n, branches, per_layer, lowest, paths }
}

/// First wire of C-pair `k` plus `side`.
fn pair_wire(layout: &RegisterLayout, k: usize, side: bool) -> usize {
    layout.c.wire(2 * (k - 1) + usize::from(side))
}

/// Step 4.1 as a list of composite instructions.
fn record_paths(pbst: &PathBst, layout: &RegisterLayout, mode: Mode) -> Circuit {
    let mut c = Circuit::new(layout.total());
    let layers: Vec<usize> = (0..pbst.per_layer.len()).filter(|&j| pbst.b(j) > 0).collect();
    let width = layers.iter().map(|&j| pbst.b(j)).max().unwrap_or(0);
    let dlen = layout.d.len;
    let copies: Vec<usize> = (0..width).map(|t| layout.d.wire(t)).collect();
    let mut pool: Vec<usize> = (width..dlen).map(|t| layout.d.wire(t)).collect();
    pool.extend([layout.c.wire(layout.c.len - 2), layout.c.wire(layout.c.len - 1)]);
    let fanout =
        |ctl: usize| Op::Fanout { control: ctl, targets: copies.clone(), mode: FanoutMode::Maf, pool: pool.clone() };
    let shared = mode == Mode::Maf && width >= 2;
    let mut prev: Option<usize> = None;
    let mut k = 0;
    for &j in &layers {
        let a = layout.a.wire(j);
        let b = pbst.b(j);
        if shared {
            match prev {
                None => c.push(fanout(a)),
                Some(ap) => {
                    c.cx(ap, a);
                    c.push(fanout(a));
                    c.cx(ap, a);
                }
            }
        }
        let own: Vec<(usize, bool)> =
            (0..b).map(|t| pbst.branches[k + t].clone()).map(|br| (br.parent, br.side)).collect();
        for (t, &(parent, side)) in own.iter().enumerate() {
            let kk = k + t + 1;
            if parent == 0 {
                c.x(pair_wire(layout, kk, false));
            } else {
                c.cx(pair_wire(layout, parent, side), pair_wire(layout, kk, false));
            }
        }
        let local = !shared && b >= 2;
        let pairs = tree_copy_pairs(a, &copies[..if local { b } else { 0 }]);
        pairs.iter().for_each(|&(s, t)| c.cx(s, t));
        for (t, &copy) in copies.iter().enumerate().take(b) {
            let kk = k + t + 1;
            let ctl = if shared || local { copy } else { a };
            c.push(Op::Cswap { c: ctl, a: pair_wire(layout, kk, false), b: pair_wire(layout, kk, true) });
        }
        pairs.iter().rev().for_each(|&(s, t)| c.cx(s, t));
        k += b;
        prev = Some(a);
    }
    if let (true, Some(ap)) = (shared, prev) {
        c.push(fanout(ap));
    }
    c
}

/// Appends stage 4: records branch paths in `C`, clears `B`, un-records.
pub fn emit_garbage_elim(
    c: &mut Circuit,
    layout: &RegisterLayout,
    pbst: &PathBst,
    mode: Mode,
) -> Result<(), PipelineError> {
    let d = pbst.paths.len();
    if layout.c.len < 2 * d || layout.d.len < d {
        return Err(PipelineError::RegisterTooSmall { name: "C", need: 2 * d, have: layout.c.len });
    }
    if pbst.num_branches() == 0 {
        return Ok(());
    }
    let record = record_paths(pbst, layout, mode);
    for ins in &record.instrs {
        c.push(ins.op.clone());
    }
    for i in 0..d {
        let (k, side) = pbst.lb(i).expect("every path has a branch when d >= 2");
        c.cx(pair_wire(layout, k, side), layout.b.wire(i));
    }
    for ins in record.instrs.iter().rev() {
        c.push(ins.op.inverse().expect("recording is reversible"));
    }
    Ok(())
}

/// Builds the full circuit with composite instructions left in place.
pub fn compile_composite(spec: &SparseStateSpec, mode: Mode) -> Result<Circuit, PipelineError> {
    let (n, d) = (spec.n(), spec.d());
    let nprime = ceil_log2(d);
    let mut c = Circuit::new(0);
    let layout = RegisterLayout::allocate(&mut c, n, d);
    if d == 1 {
        c.set_stage(Some(Stage::Permutation));
        (0..n).filter(|&j| spec.bit(0, j)).for_each(|j| c.x(layout.a.wire(j)));
        c.set_stage(None);
        return Ok(c);
    }
    let boundary = |c: &mut Circuit| {
        if mode == Mode::Maf {
            c.round();
        }
    };

    c.set_stage(Some(Stage::Gqsp));
    let bst = AmplitudeBst::new(&spec.compact_amplitudes());
    let wires: Vec<usize> = (0..nprime).map(|j| layout.a.wire(j)).collect();
    emit_grover_rudolph(&mut c, &bst, &wires);
    boundary(&mut c);

    c.set_stage(Some(Stage::Onehot));
    let onehot = match mode {
        Mode::Unitary => OnehotMode::Copy,
        Mode::Maf => OnehotMode::Maf,
    };
    emit_onehot(&mut c, &layout, nprime, onehot)?;
    boundary(&mut c);

    c.set_stage(Some(Stage::Permutation));
    emit_permutation(&mut c, &layout, spec, mode)?;
    boundary(&mut c);

    c.set_stage(Some(Stage::Garbage));
    emit_garbage_elim(&mut c, &layout, &build_path_bst(spec), mode)?;
    c.set_stage(None);
    Ok(c)
}

/// Compiles `spec` into a native circuit over `A`, `B`, `C`, `D`.
pub fn compile_sqsp(spec: &SparseStateSpec, mode: Mode) -> Result<Circuit, PipelineError> {
    Ok(lower(&compile_composite(spec, mode)?)?)
}
