use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{run_circuit, StateVector};
use crate::bits::Gather;
use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Largest register for which a full matrix is extracted.
pub const MATRIX_QUBIT_LIMIT: usize = 13;

/// Default relative tolerance of the power iteration in [`operator_distance`].
pub const POWER_ITERATION_TOL: f64 = 1e-7;

const POWER_ITERATION_MAX: usize = 200_000;

/// A dense complex matrix. Rectangular matrices appear as isometries (a
/// circuit restricted to inputs with ancillas in `|0>`).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: Array2<Complex64>,
}

impl DenseOperator {
    pub fn new(matrix: Array2<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(Array2::eye(dim))
    }

    /// Matrix whose column `j` is `f(j)`.
    pub fn from_columns(rows: usize, columns: Vec<Vec<Complex64>>) -> Result<Self> {
        let cols = columns.len();
        let mut matrix = Array2::zeros((rows, cols));
        for (j, col) in columns.into_iter().enumerate() {
            if col.len() != rows {
                return Err(Error::LengthMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            matrix.column_mut(j).assign(&Array1::from(col));
        }
        Ok(Self { matrix })
    }

    /// Permutation matrix sending basis `j` to basis `f(j)`.
    pub fn from_basis_map(dim: usize, f: impl Fn(usize) -> usize) -> Self {
        let mut matrix = Array2::zeros((dim, dim));
        for j in 0..dim {
            matrix[[f(j), j]] = Complex64::new(1.0, 0.0);
        }
        Self { matrix }
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.matrix.t().mapv(|z| z.conj()))
    }

    pub fn dot(&self, other: &DenseOperator) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch(
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols(),
            ));
        }
        Ok(Self::new(self.matrix.dot(&other.matrix)))
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::new(&self.matrix - &other.matrix))
    }

    /// `max |(U^dag U - I)_{ij}|`; zero exactly for an isometry.
    pub fn unitarity_deviation(&self) -> f64 {
        let gram = self.adjoint().matrix.dot(&self.matrix);
        gram.indexed_iter()
            .map(|((i, j), z)| {
                let expect = if i == j { 1.0 } else { 0.0 };
                (z - expect).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows() == self.cols() && self.unitarity_deviation() <= tol
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Keep the columns listed in `cols`, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::new(self.matrix.select(Axis(1), cols))
    }

    fn check_same_shape(&self, other: &DenseOperator) -> Result<()> {
        if self.matrix.dim() != other.matrix.dim() {
            return Err(Error::DimensionMismatch(
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols(),
            ));
        }
        Ok(())
    }

    /// Spectral norm via power iteration on `A^dag A`.
    pub fn spectral_norm(&self, rel_tol: f64) -> f64 {
        spectral_norm(&self.matrix, rel_tol)
    }
}

fn spectral_norm(d: &Array2<Complex64>, rel_tol: f64) -> f64 {
    if d.is_empty() || d.iter().all(|z| z.norm() == 0.0) {
        return 0.0;
    }
    let dh = d.t().mapv(|z| z.conj());
    // A^dag A and A A^dag share their nonzero spectrum; iterate on the smaller.
    let gram = if d.nrows() >= d.ncols() { dh.dot(d) } else { d.dot(&dh) };
    let n = gram.nrows();
    // Deterministic start with every component nonzero and no symmetry.
    let mut v: Array1<Complex64> = (0..n)
        .map(|i| {
            let t = i as f64 + 1.0;
            Complex64::new(1.0 + 0.5 * (0.7 * t).sin(), 0.3 * (1.3 * t).cos())
        })
        .collect();
    let norm = |x: &Array1<Complex64>| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let n0 = norm(&v);
    v.mapv_inplace(|z| z / n0);
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATION_MAX {
        let w = gram.dot(&v);
        let next: f64 = v.iter().zip(w.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        let wn = norm(&w);
        if wn == 0.0 {
            return 0.0;
        }
        let residual = w
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b * next).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let converged = residual <= rel_tol * next.abs()
            || (next - lambda).abs() <= rel_tol * rel_tol * next.abs();
        lambda = next;
        v = w.mapv(|z| z / wn);
        if converged {
            break;
        }
    }
    // One last Rayleigh quotient on the normalized iterate.
    let w = gram.dot(&v);
    let last: f64 = v.iter().zip(w.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    last.max(lambda).max(0.0).sqrt()
}

/// Spectral norm of `a - b`, by power iteration on `(a-b)^dag (a-b)`.
pub fn operator_distance(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    operator_distance_tol(a, b, POWER_ITERATION_TOL)
}

pub fn operator_distance_tol(a: &DenseOperator, b: &DenseOperator, rel_tol: f64) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(d.spectral_norm(rel_tol))
}

/// Full unitary of a circuit, column `j` being the image of basis `j`.
pub fn circuit_to_matrix(circuit: &Circuit) -> Result<DenseOperator> {
    let q = circuit.qubit_count();
    if q > MATRIX_QUBIT_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "matrix extraction".into(),
            needed: q,
            limit: MATRIX_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << q;
    let cols: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            run_circuit(circuit, StateVector::from_index(q, j))
                .map(|s| s.amplitudes().to_vec())
        })
        .collect::<Result<_>>()?;
    DenseOperator::from_columns(dim, cols)
}

/// The isometry obtained by feeding basis states on `logical` wires (first
/// listed wire most significant) with every other wire in `|0>`.
pub fn circuit_isometry(circuit: &Circuit, logical: &[usize]) -> Result<DenseOperator> {
    let q = circuit.qubit_count();
    let budget = super::budget_qubits();
    if q > budget {
        return Err(Error::BudgetExceeded {
            what: "isometry extraction".into(),
            needed: q,
            limit: budget,
        });
    }
    if logical.len() > MATRIX_QUBIT_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "isometry extraction (logical wires)".into(),
            needed: logical.len(),
            limit: MATRIX_QUBIT_LIMIT,
        });
    }
    for &w in logical {
        if w >= q {
            return Err(Error::IndexOutOfRange { index: w, qubits: q });
        }
    }
    crate::bits::check_distinct(logical)?;
    let g = Gather::new(q, logical);
    let k = 1usize << logical.len();
    let cols: Vec<Vec<Complex64>> = (0..k as u64)
        .into_par_iter()
        .map(|x| {
            run_circuit(circuit, StateVector::from_index(q, g.scatter(x)))
                .map(|s| s.amplitudes().to_vec())
        })
        .collect::<Result<_>>()?;
    DenseOperator::from_columns(1usize << q, cols)
}

/// Embed a `2^k`-dimensional unitary acting on `logical` wires of a
/// `q`-qubit register as an isometry with every other wire in `|0>` on both
/// sides; comparable with [`circuit_isometry`].
pub fn embed_ideal(ideal: &DenseOperator, q: usize, logical: &[usize]) -> Result<DenseOperator> {
    let k = 1usize << logical.len();
    if ideal.rows() != k || ideal.cols() != k {
        return Err(Error::DimensionMismatch(ideal.rows(), ideal.cols(), k, k));
    }
    let g = Gather::new(q, logical);
    let mut matrix = Array2::zeros((1usize << q, k));
    for j in 0..k {
        for i in 0..k {
            matrix[[g.scatter(i as u64), j]] = ideal.matrix[[i, j]];
        }
    }
    Ok(DenseOperator::new(matrix))
}
