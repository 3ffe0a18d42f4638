//! Dense state preparation by a binary tree of controlled rotations.
//!
//! Node `(i, k)` of the tree holds the norm `x_{i,k}` of the amplitudes whose
//! first `i` index bits equal `k`. Layer `i` rotates qubit `i` by
//! `theta_{i,k} = 2 acos(x_{i+1,2k} / x_{i,k})` under the pattern `k` on qubits
//! `0..i`, and corrects the relative phase of the two children with an `RZ`.
//! Each layer is a pair of uniformly controlled rotations, so the tree costs
//! `O(2^nprime)` gates.

use num_complex::Complex64;

use crate::circuit::{Circuit, Op};
use crate::state::ZERO_TOL;

#[derive(Clone, Debug)]
pub struct AmplitudeBst {
    nprime: usize,
    /// `x[i][k]` for `i = 0..=nprime`.
    x: Vec<Vec<f64>>,
    /// Mean phase carried by each node.
    psi: Vec<Vec<f64>>,
}

impl AmplitudeBst {
    /// Builds the tree over `amps`, whose length must be a power of two.
    pub fn new(amps: &[Complex64]) -> Self {
        assert!(amps.len().is_power_of_two(), "amplitude vector length must be a power of two");
        let nprime = amps.len().trailing_zeros() as usize;
        let mut x = vec![Vec::new(); nprime + 1];
        let mut psi = vec![Vec::new(); nprime + 1];
        x[nprime] = amps.iter().map(|a| a.norm()).collect();
        psi[nprime] = amps.iter().map(|a| if a.norm() < ZERO_TOL { 0.0 } else { a.arg() }).collect();
        for i in (0..nprime).rev() {
            let width = 1usize << i;
            let (mut xi, mut pi) = (Vec::with_capacity(width), Vec::with_capacity(width));
            for k in 0..width {
                let (l, r) = (x[i + 1][2 * k], x[i + 1][2 * k + 1]);
                xi.push((l * l + r * r).sqrt());
                let (pl, pr) = (psi[i + 1][2 * k], psi[i + 1][2 * k + 1]);
                pi.push(if r < ZERO_TOL {
                    pl
                } else if l < ZERO_TOL {
                    pr
                } else {
                    (pl + pr) / 2.0
                });
            }
            x[i] = xi;
            psi[i] = pi;
        }
        Self { nprime, x, psi }
    }

    pub fn nprime(&self) -> usize {
        self.nprime
    }

    pub fn x(&self, i: usize, k: usize) -> f64 {
        self.x[i][k]
    }

    /// Rotation angle of node `(i, k)`; zero for a vanishing subtree.
    pub fn theta(&self, i: usize, k: usize) -> f64 {
        let parent = self.x[i][k];
        if parent < ZERO_TOL {
            return 0.0;
        }
        2.0 * (self.x[i + 1][2 * k] / parent).clamp(-1.0, 1.0).acos()
    }

    /// Relative phase between the children of node `(i, k)`.
    pub fn phi(&self, i: usize, k: usize) -> f64 {
        let (l, r) = (self.x[i + 1][2 * k], self.x[i + 1][2 * k + 1]);
        if l < ZERO_TOL || r < ZERO_TOL {
            return 0.0;
        }
        self.psi[i + 1][2 * k + 1] - self.psi[i + 1][2 * k]
    }
}

pub fn build_amplitude_bst(amps: &[Complex64]) -> AmplitudeBst {
    AmplitudeBst::new(amps)
}

/// Appends tree layer `i` acting on `wires` (qubit `j` of the index on
/// `wires[j]`) as one uniformly controlled `RY` followed by one uniformly
/// controlled `RZ`. A rotation whose angles all vanish is omitted.
pub fn emit_layer(c: &mut Circuit, bst: &AmplitudeBst, i: usize, wires: &[usize]) {
    assert_eq!(wires.len(), bst.nprime);
    let controls = &wires[..i];
    let target = wires[i];
    let live = |k: usize| bst.x(i, k) >= ZERO_TOL;
    let clean = |a: f64| if a.abs() > ZERO_TOL { a } else { 0.0 };
    let theta: Vec<f64> = (0..1usize << i).map(|k| if live(k) { clean(bst.theta(i, k)) } else { 0.0 }).collect();
    let phi: Vec<f64> = (0..1usize << i).map(|k| if live(k) { clean(bst.phi(i, k)) } else { 0.0 }).collect();
    if theta.iter().any(|&a| a != 0.0) {
        c.push(Op::Ucry { controls: controls.to_vec(), target, angles: theta });
    }
    if phi.iter().any(|&a| a != 0.0) {
        c.push(Op::Ucrz { controls: controls.to_vec(), target, angles: phi });
    }
}

/// Appends the whole tree, preparing `sum_k amps[k] |k>` on `wires` up to a
/// global phase.
pub fn emit_grover_rudolph(c: &mut Circuit, bst: &AmplitudeBst, wires: &[usize]) {
    for i in 0..bst.nprime {
        emit_layer(c, bst, i, wires);
    }
}
