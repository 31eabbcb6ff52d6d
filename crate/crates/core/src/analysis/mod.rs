//! Exact evaluation of the quantities behind the grid construction and the
//! parity/fanout reductions.
//!
//! Dense paths simulate one column and combine columns through their
//! product structure; the symmetric path handles Hamming slices at sizes
//! far beyond dense simulation using exact rational arithmetic.

mod oracles;
mod symmetric;

pub use oracles::{basis_error_profile, qudit_mod_oracle, ErrorProfile, IdealGate, InputError, QUDIT_DIM_LIMIT};
pub use symmetric::{krawtchouk, slice_column_weights, slice_symmetric_stats, SYMMETRIC_MAX_BITS};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitBuilder;
use crate::constructions::{compute_m, reflection_gates, set_fraction, UsMode};
use crate::error::{Error, Result};
use crate::fsets::{ParityRestrictedSet, SetForm};
use crate::gates;
use crate::statevector::{check_budget, run_circuit, StateVector};

/// Largest column simulated densely.
pub const COLUMN_MAX_BITS: usize = 24;
/// Largest `n` for the `2^n`-term inclusion-exclusion.
pub const TARGET_MAX_BITS: usize = 20;
/// Agreement required between simulated and closed-form column masses.
pub const COLUMN_TOL: f64 = 1e-9;

/// Statistics of one reflected column `R|1^n>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub n: usize,
    pub set_size: String,
    pub gamma0: f64,
    pub gamma1: f64,
    pub p0: f64,
    pub p1: f64,
    /// Outcome probabilities indexed by the column's basis index.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distribution: Option<Vec<f64>>,
}

/// Exact `(gamma0, gamma1, p0, p1)` for a set of relative size `r`.
pub(crate) fn column_formulas(r: &BigRational) -> [BigRational; 4] {
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let g0 = (&one - r) * (&one - r);
    let g1 = r * r;
    let p0 = BigRational::from_integer(BigInt::from(4)) * &g0 * &g1;
    let d = &one - &two * &g1;
    let p1 = &d * &d;
    [g0, g1, p0, p1]
}

pub(crate) fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Closed-form column statistics, plus the simulated outcome distribution
/// when requested (checked against the closed forms at [`COLUMN_TOL`]).
pub fn column_stats(set: &ParityRestrictedSet, with_distribution: bool) -> Result<ColumnStats> {
    let n = set.n();
    let [g0, g1, p0, p1] = column_formulas(&set_fraction(n, &set.size())).map(|x| to_f64(&x));
    let distribution = if with_distribution {
        if n > COLUMN_MAX_BITS {
            return Err(Error::BudgetExceeded {
                what: "column simulation".into(),
                needed: n,
                limit: COLUMN_MAX_BITS,
            });
        }
        check_budget("column simulation", n)?;
        let wires: Vec<usize> = (0..n).collect();
        let mut b = CircuitBuilder::new(n);
        b.extend(wires.iter().map(|&w| gates::x(w)));
        b.extend(reflection_gates(set, &wires, None, UsMode::Direct)?);
        let state = run_circuit(&b.build("column"), StateVector::zero(n))?;
        let dist = state.probabilities();
        let last = dist.len() - 1;
        if (dist[0] - p0).abs() > COLUMN_TOL || (dist[last] - p1).abs() > COLUMN_TOL {
            return Err(Error::CheckFailed(format!(
                "column masses ({}, {}) disagree with (4 g0 g1, (1 - 2 g1)^2) = ({p0}, {p1})",
                dist[0], dist[last]
            )));
        }
        Some(dist)
    } else {
        None
    };
    Ok(ColumnStats {
        n,
        set_size: set.size().to_string(),
        gamma0: g0,
        gamma1: g1,
        p0,
        p1,
        distribution,
    })
}

/// Outcome probabilities of the grid's target register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetDistribution {
    pub m: usize,
    pub p0: f64,
    pub p1: f64,
    /// Targets read `0^n`.
    pub p_zero: f64,
    /// Targets read `1^n`.
    pub p_one: f64,
    /// Some column reads neither `0^n` nor `1^n`.
    pub p_bad: f64,
    /// `m (1 - p0 - p1)`.
    pub p_bad_union: f64,
    /// Targets read a mixed pattern.
    pub p_mixed: f64,
}

impl TargetDistribution {
    pub(crate) fn from_parts(m: usize, p0: f64, p1: f64, p_zero: f64, p_one: f64, p_bad: f64) -> Self {
        TargetDistribution {
            m,
            p0,
            p1,
            p_zero,
            p_one,
            p_bad,
            p_bad_union: m as f64 * (1.0 - p0 - p1),
            p_mixed: 1.0 - p_zero - p_one,
        }
    }

    /// `(sqrt P_zero + sqrt P_one)^2 / 2`.
    pub fn fidelity(&self) -> f64 {
        let s = self.p_zero.max(0.0).sqrt() + self.p_one.max(0.0).sqrt();
        s * s / 2.0
    }
}

/// Target distribution of an `m`-column grid from the exact column
/// distribution. Row `r` of the targets reads the AND of row `r` over all
/// columns, so `P_zero = sum_T (-1)^|T| q_T^m` with `q_T` the probability
/// that a column reads 1 on every row of `T`.
pub fn grid_target_distribution(stats: &ColumnStats, m: usize) -> Result<TargetDistribution> {
    let n = stats.n;
    if n > TARGET_MAX_BITS {
        return Err(Error::BudgetExceeded {
            what: "target inclusion-exclusion".into(),
            needed: n,
            limit: TARGET_MAX_BITS,
        });
    }
    let dist = stats
        .distribution
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("column stats carry no distribution".into()))?;
    if dist.len() != 1usize << n {
        return Err(Error::LengthMismatch {
            expected: 1usize << n,
            found: dist.len(),
        });
    }
    let mut q = dist.clone();
    for bit in 0..n {
        let b = 1usize << bit;
        for t in 0..q.len() {
            if t & b == 0 {
                q[t] += q[t | b];
            }
        }
    }
    let p_zero: f64 = q
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            let term = v.powi(m as i32);
            if t.count_ones() % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum();
    let p0 = dist[0];
    let p1 = dist[dist.len() - 1];
    let p_one = p1.powi(m as i32);
    let p_bad = 1.0 - (p0 + p1).powi(m as i32);
    Ok(TargetDistribution::from_parts(m, p0, p1, p_zero, p_one, p_bad))
}

/// Fidelity with the canonical nekomata of `state` on `targets`:
/// `(||P0 phi|| + ||P1 phi||)^2 / 2`.
pub fn nekomata_fidelity(state: &StateVector, targets: &[usize]) -> Result<f64> {
    let k = targets.len();
    if k == 0 || k > 64 {
        return Err(Error::InvalidParameter(format!("cannot project onto {k} targets")));
    }
    let ones = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let a = state.projection_norm_value(targets, 0)?;
    let b = state.projection_norm_value(targets, ones)?;
    Ok((a + b) * (a + b) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMode {
    Dense,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundFlags {
    pub p_one: bool,
    pub p_bad: bool,
    pub p_zero: bool,
    pub fidelity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NekomataReport {
    pub n: usize,
    pub set_size: String,
    pub m: usize,
    pub mode: AnalysisMode,
    pub gamma1: f64,
    pub p_all_zero: f64,
    pub p_all_one: f64,
    pub p_bad: f64,
    pub p_bad_union: f64,
    pub fidelity: f64,
    /// `1 - fidelity`.
    pub epsilon: f64,
    /// `1/2 - |S|^2 / 2^{2n-2}`, strict lower bound on `p_all_one`.
    pub bound_p1: f64,
    /// `|S| / 2^{n-2}`, strict upper bound on `p_bad`.
    pub bound_bad: f64,
    /// `1/2 - |S| / 2^{n-2}`, lower bound on `p_all_zero`.
    pub bound_p0: f64,
    /// `1 - |S| / 2^{n-3}`, lower bound on `fidelity`.
    pub bound_fidelity: f64,
    /// `|S|^2 / 2^{2n}`, the scale of the approximation error in the
    /// headline error statement, reported alongside `epsilon`.
    pub statement_scale: f64,
    pub flags: BoundFlags,
    /// All four right-hand sides lie strictly inside `(0, 1)`.
    pub non_vacuous: bool,
}

impl NekomataReport {
    pub fn pass(&self) -> bool {
        let f = self.flags;
        f.p_one && f.p_bad && f.p_zero && f.fidelity
    }
}

/// Evaluate the grid's target statistics at `m` columns (default
/// [`compute_m`]) and check the four bounds. Requires `gamma1 <= 1/16`.
pub fn verify_grid_bounds(set: &ParityRestrictedSet, m: Option<usize>, mode: AnalysisMode) -> Result<NekomataReport> {
    let n = set.n();
    let size = set.size();
    let r = set_fraction(n, &size);
    let [_, g1, _, _] = column_formulas(&r);
    if g1 > BigRational::new(BigInt::from(1), BigInt::from(16)) {
        return Err(Error::Gamma1TooLarge(to_f64(&g1)));
    }
    let m = match m {
        Some(m) => m,
        None => compute_m(n, &size)?,
    };
    let dist = match mode {
        AnalysisMode::Dense => grid_target_distribution(&column_stats(set, true)?, m)?,
        AnalysisMode::Symmetric => match set.form() {
            SetForm::HammingSlice { weight } => slice_symmetric_stats(n, *weight, m)?,
            _ => {
                return Err(Error::InvalidParameter(
                    "symmetric analysis needs a Hamming slice".into(),
                ))
            }
        },
    };
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let one = BigRational::one();
    // |S| / 2^{n-2} = 2r and |S| / 2^{n-3} = 4r
    let two_r = &r * BigRational::from_integer(BigInt::from(2));
    let bound_p1 = to_f64(&(&half - &g1));
    let bound_bad = to_f64(&two_r);
    let bound_p0 = to_f64(&(&half - &two_r));
    let bound_fidelity = to_f64(&(&one - &two_r * BigRational::from_integer(BigInt::from(2))));
    let fidelity = dist.fidelity();
    let flags = BoundFlags {
        p_one: dist.p_one > bound_p1,
        p_bad: dist.p_bad < bound_bad,
        p_zero: dist.p_zero >= bound_p0,
        fidelity: fidelity >= bound_fidelity,
    };
    let inside = |x: f64| x > 0.0 && x < 1.0;
    Ok(NekomataReport {
        n,
        set_size: size.to_string(),
        m,
        mode,
        gamma1: to_f64(&g1),
        p_all_zero: dist.p_zero,
        p_all_one: dist.p_one,
        p_bad: dist.p_bad,
        p_bad_union: dist.p_bad_union,
        fidelity,
        epsilon: 1.0 - fidelity,
        bound_p1,
        bound_bad,
        bound_p0,
        bound_fidelity,
        statement_scale: to_f64(&(&g1 / BigRational::from_integer(BigInt::from(4)))),
        flags,
        non_vacuous: [bound_p1, bound_bad, bound_p0, bound_fidelity].into_iter().all(inside),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::build_grid_nekomata;

    #[test]
    fn column_examples() {
        let s = column_stats(&ParityRestrictedSet::singleton(4, 0b1111).unwrap(), true).unwrap();
        assert!((s.gamma0 - 0.765625).abs() < 1e-15);
        assert!((s.p1 - (31.0f64 / 32.0).powi(2)).abs() < 1e-12);
        let slice = column_stats(&ParityRestrictedSet::hamming_slice(8, 4).unwrap(), true).unwrap();
        let d = slice.distribution.unwrap();
        assert!((d[255] - (1.0 - 2.0 * 4900.0 / 16384.0f64).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn point_distribution_at_ones() {
        let mut dist = vec![0.0; 8];
        dist[7] = 1.0;
        let stats = ColumnStats {
            n: 3,
            set_size: "0".into(),
            gamma0: 1.0,
            gamma1: 0.0,
            p0: 0.0,
            p1: 1.0,
            distribution: Some(dist),
        };
        let t = grid_target_distribution(&stats, 4).unwrap();
        assert_eq!((t.p_one, t.p_zero), (1.0, 0.0));
    }

    /// Single column: enumerate outcomes directly.
    #[test]
    fn single_column_enumeration() {
        let set = ParityRestrictedSet::from_bitstrings(4, &["1100", "1111"]).unwrap();
        let stats = column_stats(&set, true).unwrap();
        let t = grid_target_distribution(&stats, 1).unwrap();
        let d = stats.distribution.as_ref().unwrap();
        assert!((t.p_zero - d[0]).abs() < 1e-12);
        assert!((t.p_one - d[15]).abs() < 1e-12);
    }

    #[test]
    fn dense_grid_matches_distribution() {
        let set = ParityRestrictedSet::from_bitstrings(3, &["111"]).unwrap();
        let m = 3;
        let c = build_grid_nekomata(&set, m, UsMode::Direct).unwrap();
        let state = run_circuit(&c, StateVector::zero(c.qubit_count())).unwrap();
        let targets = c.role("targets").unwrap();
        let marginal = state.marginal(targets).unwrap();
        let t = grid_target_distribution(&column_stats(&set, true).unwrap(), m).unwrap();
        assert!((marginal[0] - t.p_zero).abs() < 1e-9);
        assert!((marginal[7] - t.p_one).abs() < 1e-9);
        let f = nekomata_fidelity(&state, targets).unwrap();
        assert!((f - t.fidelity()).abs() < 1e-9);
    }

    #[test]
    fn bounds_small_singleton() {
        let set = ParityRestrictedSet::singleton(4, 0b1111).unwrap();
        let r = verify_grid_bounds(&set, Some(11), AnalysisMode::Dense).unwrap();
        assert!(r.pass(), "{r:?}");
        let big = ParityRestrictedSet::hamming_slice(4, 2).unwrap();
        assert!(matches!(
            verify_grid_bounds(&big, None, AnalysisMode::Dense),
            Err(Error::Gamma1TooLarge(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let mut s = StateVector::zero(4);
        assert!((nekomata_fidelity(&s, &[0, 1, 2]).unwrap() - 0.5).abs() < 1e-15);
        s.apply_single_qubit(0, &crate::statevector::mats::H).unwrap();
        s.apply_gate(&gates::cnot(0, 1)).unwrap();
        s.apply_gate(&gates::cnot(0, 2)).unwrap();
        assert!((nekomata_fidelity(&s, &[0, 1, 2]).unwrap() - 1.0).abs() < 1e-15);
    }
}
