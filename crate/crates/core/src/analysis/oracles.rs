use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{self, ideal};
use crate::statevector::{check_budget, circuit_isometry, embed_ideal, DenseOperator};

/// Largest qudit register dimension `p^{n+1}` handled by the oracle.
pub const QUDIT_DIM_LIMIT: usize = 1 << 13;

fn digits_of(mut idx: usize, p: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = idx % p;
        idx /= p;
    }
    d
}

fn index_of(d: &[usize], p: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * p + x)
}

/// `Q_p` (or its adjoint) on digit `pos` of every column of `v`.
fn apply_fourier(v: &mut Array2<Complex64>, p: usize, len: usize, pos: usize, adjoint: bool) {
    let stride = p.pow((len - 1 - pos) as u32);
    let sign = if adjoint { -1.0 } else { 1.0 };
    let omega: Vec<Complex64> = (0..p)
        .map(|k| Complex64::from_polar(1.0 / (p as f64).sqrt(), sign * 2.0 * std::f64::consts::PI * k as f64 / p as f64))
        .collect();
    let dim = v.nrows();
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    for mut col in v.columns_mut() {
        for base in 0..dim {
            if (base / stride) % p != 0 {
                continue;
            }
            for (j, slot) in buf.iter_mut().enumerate() {
                *slot = (0..p).map(|b| omega[(j * b) % p] * col[base + b * stride]).sum();
            }
            for (j, &val) in buf.iter().enumerate() {
                col[base + j * stride] = val;
            }
        }
    }
}

/// Both sides of `M_{n,p} = (Q_p^dag)^{(n+1)} Fanout_{n,p} Q_p^{(n+1)}` over
/// `n + 1` qudits (digit 0 is `b`), returned as `(lhs, rhs)`.
///
/// `M|b, x> = |b - sum x_i mod p, x>` and `Fanout|b, x> = |b, x_i + b mod p>`.
pub fn qudit_mod_oracle(p: usize, n: usize) -> Result<(DenseOperator, DenseOperator)> {
    if !gates::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let len = n + 1;
    let dim = (p as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    if dim > QUDIT_DIM_LIMIT as u128 {
        return Err(Error::BudgetExceeded {
            what: "qudit oracle dimension".into(),
            needed: dim.min(usize::MAX as u128) as usize,
            limit: QUDIT_DIM_LIMIT,
        });
    }
    let dim = dim as usize;
    let lhs = DenseOperator::from_basis_map(dim, |i| {
        let mut d = digits_of(i, p, len);
        let s: usize = d[1..].iter().sum();
        d[0] = (d[0] + p - s % p) % p;
        index_of(&d, p)
    });
    let fanout = |i: usize| {
        let mut d = digits_of(i, p, len);
        let b = d[0];
        for x in d[1..].iter_mut() {
            *x = (*x + b) % p;
        }
        index_of(&d, p)
    };
    let mut v = Array2::<Complex64>::eye(dim);
    for pos in 0..len {
        apply_fourier(&mut v, p, len, pos, false);
    }
    let mut moved = Array2::<Complex64>::zeros((dim, dim));
    for i in 0..dim {
        moved.row_mut(fanout(i)).assign(&v.row(i));
    }
    for pos in 0..len {
        apply_fourier(&mut moved, p, len, pos, true);
    }
    Ok((lhs, DenseOperator::new(moved)))
}

/// Reference operator for [`basis_error_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum IdealGate {
    Parity { n: usize },
    Fanout { n: usize },
    And { n: usize },
    /// Flip `b` iff `x` has the given weight parity.
    ParityClass { n: usize, parity: u8 },
}

impl IdealGate {
    pub fn arity(&self) -> usize {
        match *self {
            IdealGate::Parity { n } | IdealGate::Fanout { n } | IdealGate::And { n } | IdealGate::ParityClass { n, .. } => n,
        }
    }

    pub fn operator(&self) -> DenseOperator {
        match *self {
            IdealGate::Parity { n } => ideal::parity(n),
            IdealGate::Fanout { n } => ideal::fanout(n),
            IdealGate::And { n } => ideal::and(n),
            IdealGate::ParityClass { n, parity } => {
                ideal::indicator(n, move |x| (x.count_ones() % 2) as u8 == parity)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputError {
    pub input: String,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile {
    pub max_l2: f64,
    pub per_input: Vec<InputError>,
}

/// L2 distance, for every basis input on `logical` (other wires `|0>`),
/// between the circuit's output and the ideal output with every other wire
/// back in `|0>`.
pub fn basis_error_profile(circuit: &Circuit, ideal: &IdealGate, logical: &[usize]) -> Result<ErrorProfile> {
    let k = ideal.arity() + 1;
    if logical.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            found: logical.len(),
        });
    }
    check_budget("basis error profile", circuit.qubit_count())?;
    let got = circuit_isometry(circuit, logical)?;
    let want = embed_ideal(&ideal.operator(), circuit.qubit_count(), logical)?;
    let diff = got.sub(&want)?;
    let per_input: Vec<InputError> = diff
        .matrix()
        .columns()
        .into_iter()
        .enumerate()
        .map(|(x, col)| InputError {
            input: bits::format(x as u64, k),
            l2: col.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt(),
        })
        .collect();
    let max_l2 = per_input.iter().map(|e| e.l2).fold(0.0, f64::max);
    Ok(ErrorProfile { max_l2, per_input })
}
