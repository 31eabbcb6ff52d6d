//! Bitstring conventions.
//!
//! A string `b_0 b_1 ... b_{n-1}` is stored as the integer whose most
//! significant of `n` bits is `b_0`. The same big-endian rule maps qubit 0 of
//! a register to the most significant bit of a basis index.

use crate::error::{Error, Result};

/// Parse a `0`/`1` string of exactly `n` characters.
pub fn parse(text: &str, n: usize) -> Result<u64> {
    let text = text.trim();
    if text.len() != n || n > 64 {
        return Err(Error::BadBitstring {
            text: text.to_string(),
            n,
        });
    }
    let mut value = 0u64;
    for ch in text.chars() {
        value <<= 1;
        match ch {
            '0' => {}
            '1' => value |= 1,
            _ => {
                return Err(Error::BadBitstring {
                    text: text.to_string(),
                    n,
                })
            }
        }
    }
    Ok(value)
}

pub fn format(value: u64, n: usize) -> String {
    (0..n)
        .map(|i| if bit(value, n, i) { '1' } else { '0' })
        .collect()
}

/// Bit at string position `pos` of an `n`-bit value.
#[inline]
pub fn bit(value: u64, n: usize, pos: usize) -> bool {
    (value >> (n - 1 - pos)) & 1 == 1
}

/// Mask selecting string position `pos` of an `n`-bit value.
#[inline]
pub fn mask(n: usize, pos: usize) -> u64 {
    1u64 << (n - 1 - pos)
}

#[inline]
pub fn weight(value: u64) -> u32 {
    value.count_ones()
}

/// Gather the bits of `index` on `wires` (a `qubits`-qubit register) into a
/// `wires.len()`-bit value, `wires[0]` landing in the most significant bit.
#[inline]
pub fn gather(index: usize, qubits: usize, wires: &[usize]) -> u64 {
    let mut out = 0u64;
    for &w in wires {
        out = (out << 1) | ((index >> (qubits - 1 - w)) & 1) as u64;
    }
    out
}

/// Precomputed shift amounts for repeated [`gather`] calls.
#[derive(Debug, Clone)]
pub struct Gather {
    shifts: Vec<u32>,
}

impl Gather {
    pub fn new(qubits: usize, wires: &[usize]) -> Self {
        Self {
            shifts: wires.iter().map(|&w| (qubits - 1 - w) as u32).collect(),
        }
    }

    #[inline]
    pub fn apply(&self, index: usize) -> u64 {
        let mut out = 0u64;
        for &s in &self.shifts {
            out = (out << 1) | ((index >> s) & 1) as u64;
        }
        out
    }

    /// The basis-index mask covered by these wires.
    pub fn mask(&self) -> usize {
        self.shifts.iter().fold(0usize, |m, &s| m | (1usize << s))
    }

    /// Inverse of [`Gather::apply`]: place a `wires.len()`-bit value back into
    /// index positions.
    #[inline]
    pub fn scatter(&self, value: u64) -> usize {
        let k = self.shifts.len();
        let mut out = 0usize;
        for (i, &s) in self.shifts.iter().enumerate() {
            if (value >> (k - 1 - i)) & 1 == 1 {
                out |= 1usize << s;
            }
        }
        out
    }
}

pub fn check_distinct(wires: &[usize]) -> Result<()> {
    for (i, w) in wires.iter().enumerate() {
        if wires[..i].contains(w) {
            return Err(Error::OverlappingWires(*w));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_is_big_endian() {
        assert_eq!(parse("101", 3).unwrap(), 5);
        assert_eq!(parse("001", 3).unwrap(), 1);
        assert_eq!(format(5, 3), "101");
        assert!(parse("10", 3).is_err());
        assert!(parse("1a1", 3).is_err());
    }

    #[test]
    fn gather_scatter_agree() {
        let g = Gather::new(5, &[3, 0, 4]);
        // index 0b10011: qubit0=1, qubit3=1, qubit4=1
        assert_eq!(g.apply(0b10011), 0b111);
        assert_eq!(g.apply(0b00010), 0b100);
        assert_eq!(g.scatter(0b100), 0b00010);
        assert_eq!(g.mask(), 0b10011);
        assert_eq!(gather(0b00010, 5, &[3, 0, 4]), 0b100);
    }
}
