//! Dense statevector simulation with structured kernels.
//!
//! Every kernel runs in `O(2^q)` (times the gate arity) via index arithmetic;
//! no `2^q x 2^q` matrix is ever formed here. Qubit 0 is the most significant
//! bit of the basis index.

mod operator;
mod predicate;

pub use operator::{
    circuit_isometry, circuit_to_matrix, embed_ideal, operator_distance, operator_distance_tol,
    DenseOperator, MATRIX_QUBIT_LIMIT, POWER_ITERATION_TOL,
};
pub use predicate::BitPredicate;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bits::{self, Gather};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{GateInstance, GateKind};

/// A 2x2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

pub const UNITARY_TOL: f64 = 1e-10;

/// Default cap on dense simulation size, overridable via `NEKO_BUDGET_QUBITS`.
pub const DEFAULT_BUDGET_QUBITS: usize = 22;

pub fn budget_qubits() -> usize {
    std::env::var("NEKO_BUDGET_QUBITS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET_QUBITS)
}

/// Error unless a dense simulation of `qubits` qubits fits the budget.
pub fn check_budget(what: &str, qubits: usize) -> Result<()> {
    let limit = budget_qubits();
    if qubits > limit {
        return Err(Error::BudgetExceeded {
            what: what.to_string(),
            needed: qubits,
            limit,
        });
    }
    Ok(())
}

/// Below this many amplitudes kernels run on one thread.
const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `qubits` qubits.
    pub fn zero(qubits: usize) -> Self {
        Self::from_index(qubits, 0)
    }

    pub fn from_index(qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { qubits, amps }
    }

    /// Computational basis state named by a bitstring.
    pub fn basis_state(qubits: usize, bits: &str) -> Result<Self> {
        let bits = bits.trim();
        if bits.len() != qubits {
            return Err(Error::LengthMismatch {
                expected: qubits,
                found: bits.len(),
            });
        }
        let index = bits::parse(bits, qubits)? as usize;
        Ok(Self::from_index(qubits, index))
    }

    /// Wrap raw amplitudes; the vector must already be normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let state = Self {
            qubits: len.trailing_zeros() as usize,
            amps,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "amplitudes have norm {norm}, expected 1"
            )));
        }
        Ok(state)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Euclidean distance `|| self - other ||_2`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn check_wire(&self, w: usize) -> Result<()> {
        if w >= self.qubits {
            return Err(Error::IndexOutOfRange {
                index: w,
                qubits: self.qubits,
            });
        }
        Ok(())
    }

    fn check_wires(&self, wires: &[usize]) -> Result<()> {
        for &w in wires {
            self.check_wire(w)?;
        }
        bits::check_distinct(wires)
    }

    #[inline]
    fn mask_of(&self, w: usize) -> usize {
        1usize << (self.qubits - 1 - w)
    }

    /// Apply a 2x2 unitary to one qubit.
    pub fn apply_single_qubit(&mut self, qubit: usize, u: &Mat2) -> Result<()> {
        self.check_wire(qubit)?;
        let dev = mat2_unitarity_deviation(u);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        let stride = self.mask_of(qubit);
        let u = *u;
        let kernel = move |chunk: &mut [Complex64]| {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = u[0][0] * x + u[0][1] * y;
                *b = u[1][0] * x + u[1][1] * y;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD && stride < self.amps.len() / 2 {
            self.amps.par_chunks_mut(2 * stride).for_each(kernel);
        } else if self.amps.len() >= PAR_THRESHOLD {
            let (lo, hi) = self.amps.split_at_mut(stride);
            lo.par_iter_mut().zip(hi.par_iter_mut()).for_each(|(a, b)| {
                let (x, y) = (*a, *b);
                *a = u[0][0] * x + u[0][1] * y;
                *b = u[1][0] * x + u[1][1] * y;
            });
        } else {
            self.amps.chunks_mut(2 * stride).for_each(kernel);
        }
        Ok(())
    }

    /// Multiply the amplitude of every basis state by `(-1)^pred(x)`, where
    /// `x` is its restriction to `qubits`.
    pub fn apply_phase_predicate(&mut self, qubits: &[usize], pred: &BitPredicate) -> Result<()> {
        self.check_wires(qubits)?;
        pred.check_arity(qubits.len())?;
        let g = Gather::new(self.qubits, qubits);
        let flip = |(i, a): (usize, &mut Complex64)| {
            if pred.eval(g.apply(i)) {
                *a = -*a;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter_mut().enumerate().for_each(flip);
        } else {
            self.amps.iter_mut().enumerate().for_each(flip);
        }
        Ok(())
    }

    /// XOR `pred(controls)` into `target` on every basis component.
    pub fn apply_flip_predicate(
        &mut self,
        controls: &[usize],
        target: usize,
        pred: &BitPredicate,
    ) -> Result<()> {
        self.check_wire(target)?;
        self.check_wires(controls)?;
        if controls.contains(&target) {
            return Err(Error::OverlappingWires(target));
        }
        pred.check_arity(controls.len())?;
        let g = Gather::new(self.qubits, controls);
        let stride = self.mask_of(target);
        // Lower half of each chunk has target = 0; the partner sits `stride`
        // further. Controls never include the target, so gathering from the
        // lower index is enough.
        let kernel = |(c, chunk): (usize, &mut [Complex64])| {
            let base = c * 2 * stride;
            let (lo, hi) = chunk.split_at_mut(stride);
            for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                if pred.eval(g.apply(base + j)) {
                    std::mem::swap(a, b);
                }
            }
        };
        if self.amps.len() >= PAR_THRESHOLD && stride < self.amps.len() / 2 {
            self.amps
                .par_chunks_mut(2 * stride)
                .enumerate()
                .for_each(kernel);
        } else if self.amps.len() >= PAR_THRESHOLD {
            let (lo, hi) = self.amps.split_at_mut(stride);
            lo.par_iter_mut()
                .zip(hi.par_iter_mut())
                .enumerate()
                .for_each(|(j, (a, b))| {
                    if pred.eval(g.apply(j)) {
                        std::mem::swap(a, b);
                    }
                });
        } else {
            self.amps
                .chunks_mut(2 * stride)
                .enumerate()
                .for_each(kernel);
        }
        Ok(())
    }

    /// Move the content of `qubits[i]` to `qubits[perm[i]]`.
    pub fn apply_wire_permutation(&mut self, qubits: &[usize], perm: &[usize]) -> Result<()> {
        self.check_wires(qubits)?;
        check_permutation(perm)?;
        if perm.len() != qubits.len() {
            return Err(Error::LengthMismatch {
                expected: qubits.len(),
                found: perm.len(),
            });
        }
        // out[j] = in[src(j)]: the bit found at position perm[i] of j came
        // from position i.
        let masks: Vec<(usize, usize)> = qubits
            .iter()
            .enumerate()
            .map(|(i, &w)| (self.mask_of(w), self.mask_of(qubits[perm[i]])))
            .collect();
        let all: usize = masks.iter().fold(0, |m, &(a, _)| m | a);
        let src = |j: usize| {
            let mut i = j & !all;
            for &(from, to) in &masks {
                if j & to != 0 {
                    i |= from;
                }
            }
            i
        };
        let old = std::mem::take(&mut self.amps);
        self.amps = if old.len() >= PAR_THRESHOLD {
            (0..old.len()).into_par_iter().map(|j| old[src(j)]).collect()
        } else {
            (0..old.len()).map(|j| old[src(j)]).collect()
        };
        Ok(())
    }

    /// Apply a dense `2^k x 2^k` unitary to `k` qubits (`qubits[0]` is the
    /// most significant bit of the block index).
    pub fn apply_block_unitary(&mut self, qubits: &[usize], u: &Array2<Complex64>) -> Result<()> {
        self.check_wires(qubits)?;
        let dim = 1usize << qubits.len();
        if u.dim() != (dim, dim) {
            return Err(Error::DimensionMismatch(u.nrows(), u.ncols(), dim, dim));
        }
        let g = Gather::new(self.qubits, qubits);
        let offsets: Vec<usize> = (0..dim as u64).map(|v| g.scatter(v)).collect();
        let mask = g.mask();
        let old = std::mem::take(&mut self.amps);
        let out = |i: usize| {
            let row = g.apply(i) as usize;
            let base = i & !mask;
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, off) in offsets.iter().enumerate() {
                let coeff = u[[row, col]];
                if coeff.re != 0.0 || coeff.im != 0.0 {
                    acc += coeff * old[base | off];
                }
            }
            acc
        };
        self.amps = if old.len() >= PAR_THRESHOLD {
            (0..old.len()).into_par_iter().map(out).collect()
        } else {
            (0..old.len()).map(out).collect()
        };
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &GateInstance) -> Result<()> {
        let wires = gate.wires();
        match gate.kind() {
            GateKind::Unitary(u) if wires.len() == 1 => {
                let m = [[u[[0, 0]], u[[0, 1]]], [u[[1, 0]], u[[1, 1]]]];
                self.apply_single_qubit(wires[0], &m)
            }
            GateKind::Unitary(u) => self.apply_block_unitary(wires, u),
            GateKind::PhasePredicate(p) => self.apply_phase_predicate(wires, p),
            GateKind::FlipPredicate(p) => {
                let (target, controls) = wires.split_last().ok_or_else(|| {
                    Error::InvalidParameter("flip gate without a target".into())
                })?;
                self.apply_flip_predicate(controls, *target, p)
            }
            GateKind::WirePermutation(perm) => self.apply_wire_permutation(wires, perm),
        }
    }

    /// `|| (|pattern><pattern| on qubits) |self> ||_2`.
    pub fn projection_norm(&self, qubits: &[usize], pattern: &str) -> Result<f64> {
        if pattern.trim().len() != qubits.len() {
            return Err(Error::LengthMismatch {
                expected: qubits.len(),
                found: pattern.trim().len(),
            });
        }
        let want = bits::parse(pattern, qubits.len())?;
        self.projection_norm_value(qubits, want)
    }

    pub fn projection_norm_value(&self, qubits: &[usize], pattern: u64) -> Result<f64> {
        self.check_wires(qubits)?;
        let g = Gather::new(self.qubits, qubits);
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| g.apply(*i) == pattern)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(p.sqrt())
    }

    /// Exact outcome distribution of measuring `qubits` (indexed by the
    /// gathered pattern).
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_wires(qubits)?;
        if qubits.len() > 30 {
            return Err(Error::InvalidParameter("marginal over more than 30 qubits".into()));
        }
        let g = Gather::new(self.qubits, qubits);
        let mut out = vec![0.0; 1usize << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            out[g.apply(i) as usize] += a.norm_sqr();
        }
        Ok(out)
    }
}

pub fn check_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::NotBijection(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

fn mat2_unitarity_deviation(u: &Mat2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let dot: Complex64 = (0..2).map(|k| u[k][i].conj() * u[k][j]).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - expect).norm());
        }
    }
    worst
}

/// Run every layer of `circuit` on `initial`.
pub fn run_circuit(circuit: &Circuit, mut initial: StateVector) -> Result<StateVector> {
    if circuit.qubit_count() != initial.qubit_count() {
        return Err(Error::LengthMismatch {
            expected: circuit.qubit_count(),
            found: initial.qubit_count(),
        });
    }
    for gate in circuit.gates() {
        initial.apply_gate(gate)?;
    }
    Ok(initial)
}

pub mod mats {
    //! Common single-qubit matrices.
    use super::Mat2;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    const fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    pub const H: Mat2 = [
        [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
        [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
    ];
    pub const X: Mat2 = [[c(0.0), c(1.0)], [c(1.0), c(0.0)]];
    pub const Z: Mat2 = [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]];
    pub const I: Mat2 = [[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
}
