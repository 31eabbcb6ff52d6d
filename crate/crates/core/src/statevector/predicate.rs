use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A total Boolean function on `arity` bits.
///
/// Inputs are packed big-endian: the first wire of the gate is the most
/// significant bit of the argument to [`BitPredicate::eval`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BitPredicate {
    /// Membership in an explicit set of inputs (kept sorted).
    TruthSet { arity: usize, members: Vec<u64> },
    /// Hamming weight at least `k`.
    AtLeast { arity: usize, k: usize },
    /// Hamming weight exactly `k`.
    Exactly { arity: usize, k: usize },
    /// Hamming weight congruent to `residue` modulo `modulus`.
    ModEq {
        arity: usize,
        modulus: usize,
        residue: usize,
    },
    AllOnes { arity: usize },
    AllZeros { arity: usize },
    NotAllZeros { arity: usize },
}

impl BitPredicate {
    pub fn truth_set(arity: usize, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        if arity > 64 {
            return Err(Error::InvalidParameter(format!(
                "truth-set predicates support at most 64 inputs, got {arity}"
            )));
        }
        let mut members: Vec<u64> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&m| arity < 64 && m >> arity != 0) {
            return Err(Error::InvalidParameter(format!(
                "member {bad} does not fit in {arity} bits"
            )));
        }
        Ok(Self::TruthSet { arity, members })
    }

    pub fn mod_eq(arity: usize, modulus: usize, residue: usize) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidParameter(format!(
                "modulus must be at least 2, got {modulus}"
            )));
        }
        if residue >= modulus {
            return Err(Error::InvalidParameter(format!(
                "residue {residue} not in 0..{modulus}"
            )));
        }
        Ok(Self::ModEq {
            arity,
            modulus,
            residue,
        })
    }

    pub fn arity(&self) -> usize {
        match *self {
            Self::TruthSet { arity, .. }
            | Self::AtLeast { arity, .. }
            | Self::Exactly { arity, .. }
            | Self::ModEq { arity, .. }
            | Self::AllOnes { arity }
            | Self::AllZeros { arity }
            | Self::NotAllZeros { arity } => arity,
        }
    }

    #[inline]
    pub fn eval(&self, x: u64) -> bool {
        match self {
            Self::TruthSet { members, .. } => members.binary_search(&x).is_ok(),
            Self::AtLeast { k, .. } => x.count_ones() as usize >= *k,
            Self::Exactly { k, .. } => x.count_ones() as usize == *k,
            Self::ModEq {
                modulus, residue, ..
            } => x.count_ones() as usize % modulus == *residue,
            Self::AllOnes { arity } => x.count_ones() as usize == *arity,
            Self::AllZeros { .. } => x == 0,
            Self::NotAllZeros { .. } => x != 0,
        }
    }

    pub fn check_arity(&self, wires: usize) -> Result<()> {
        if self.arity() != wires {
            return Err(Error::ArityMismatch {
                arity: self.arity(),
                wires,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparators() {
        let ge2 = BitPredicate::AtLeast { arity: 3, k: 2 };
        assert!(ge2.eval(0b110));
        assert!(ge2.eval(0b101));
        assert!(!ge2.eval(0b100));
        let m = BitPredicate::mod_eq(4, 3, 0).unwrap();
        assert!(m.eval(0b1110));
        assert!(m.eval(0));
        assert!(!m.eval(0b1100));
        assert!(BitPredicate::AllOnes { arity: 2 }.eval(0b11));
        assert!(!BitPredicate::AllOnes { arity: 2 }.eval(0b10));
        assert!(BitPredicate::NotAllZeros { arity: 4 }.eval(0b0100));
        assert!(!BitPredicate::NotAllZeros { arity: 4 }.eval(0));
    }

    #[test]
    fn truth_set_lookup() {
        let p = BitPredicate::truth_set(3, [5, 1, 5]).unwrap();
        assert!(p.eval(5) && p.eval(1) && !p.eval(0));
        assert!(BitPredicate::truth_set(2, [4]).is_err());
        assert!(BitPredicate::mod_eq(3, 1, 0).is_err());
    }
}
