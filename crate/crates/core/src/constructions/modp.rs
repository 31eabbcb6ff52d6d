use serde_json::json;

use crate::circuit::{Circuit, CircuitBuilder};
use crate::error::{Error, Result};
use crate::gates::{self, GateInstance};

/// Wire layout: `n + 1` encoding blocks of `p` wires (block 0 carries the
/// encoded `b`, blocks `1..=n` the encoded `x_i`), then `p` counter blocks
/// of `p` wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModpLayout {
    pub p: usize,
    pub n: usize,
}

impl ModpLayout {
    pub fn block(&self, j: usize) -> Vec<usize> {
        (j * self.p..(j + 1) * self.p).collect()
    }

    pub fn counter(&self, k: usize) -> Vec<usize> {
        let base = self.p * (self.n + 1) + k * self.p;
        (base..base + self.p).collect()
    }

    pub fn qubits(&self) -> usize {
        self.p * (self.n + 1) + self.p * self.p
    }

    /// Wires 0 and 1 of every block, block by block.
    pub fn cat_wires(&self) -> Vec<usize> {
        (0..=self.n).flat_map(|j| [j * self.p, j * self.p + 1]).collect()
    }
}

fn check(p: usize, n: usize) -> Result<ModpLayout> {
    if !gates::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("modp fanout needs n >= 1".into()));
    }
    Ok(ModpLayout { p, n })
}

fn counter_ladders(l: &ModpLayout) -> Result<Vec<GateInstance>> {
    let mut out = Vec::new();
    for k in 0..l.p {
        let controls: Vec<usize> = (1..=l.n).map(|j| l.block(j)[k]).collect();
        let counter = l.counter(k);
        for ell in 0..l.p {
            out.push(gates::mod_gate(l.n, l.p, ell, &controls, counter[ell])?);
        }
    }
    Ok(out)
}

/// `E|b>E|x> -> E|b - sum x_i mod p>E|x>`: one-hot counters of
/// `s_k = #{i : x_i = k} mod p`, then `U_sigma^{k v}` on the `b` block
/// controlled by counter wire `(k, v)`, then the counters are uncomputed.
fn m_stage(l: &ModpLayout) -> Result<Vec<GateInstance>> {
    let mut out = counter_ladders(l)?;
    let b_block = l.block(0);
    for k in 1..l.p {
        let counter = l.counter(k);
        for v in 1..l.p {
            out.extend(gates::controlled_u_sigma(l.p, (k * v % l.p) as i64, counter[v], &b_block)?);
        }
    }
    out.extend(counter_ladders(l)?);
    Ok(out)
}

fn roles(b: &mut CircuitBuilder, l: &ModpLayout) {
    b.role("blocks", (0..l.p * (l.n + 1)).collect())
        .role("counters", (l.p * (l.n + 1)..l.qubits()).collect())
        .params(json!({"p": l.p, "n": l.n}));
}

/// The encoded `M_{n,p}` stage alone, on the full layout.
pub fn build_modp_m_stage(p: usize, n: usize) -> Result<Circuit> {
    let l = check(p, n)?;
    let mut b = CircuitBuilder::new(l.qubits());
    b.extend(m_stage(&l)?);
    roles(&mut b, &l);
    b.build_checked("modp-m-stage")
}

/// `(a|0> + b|1>)|0...> -> (a|0^{2(n+1)}> + b|1^{2(n+1)}>)|0...>`, the cat
/// on wires 0 and 1 of every encoding block.
///
/// Prefix: `CNOT(0 -> 1)`, `X(0)` and `X` on wire 0 of blocks `1..=n`
/// prepare `E(a|0> + b|1>) (x) E|0>^n`. Then `Qtilde_p` on every block, the
/// encoded `M_{n,p}`, `Qtilde_p^dag` on every block (together the encoded
/// `Fanout_{n,p}`), and finally `X` on wire 0 of every block maps each
/// `E|0>, E|1>` to `|00..>, |11..>`.
pub fn build_modp_fanout(p: usize, n: usize) -> Result<Circuit> {
    let l = check(p, n)?;
    let mut b = CircuitBuilder::new(l.qubits());
    b.push(gates::cnot(0, 1)).push(gates::x(0));
    for j in 1..=n {
        b.push(gates::x(l.block(j)[0]));
    }
    for j in 0..=n {
        b.push(gates::q_tilde_gate(p, &l.block(j))?);
    }
    b.extend(m_stage(&l)?);
    for j in 0..=n {
        b.push(gates::q_tilde_gate(p, &l.block(j))?.inverse());
    }
    for j in 0..=n {
        b.push(gates::x(l.block(j)[0]));
    }
    roles(&mut b, &l);
    b.role("input", vec![0]).role("cat", l.cat_wires());
    b.build_checked("modp-fanout")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::one_hot;

    /// Basis index of `E|digits>` on the blocks, counters zero.
    fn encode(l: &ModpLayout, digits: &[usize]) -> u128 {
        let q = l.qubits();
        let mut idx = 0u128;
        for (j, &d) in digits.iter().enumerate() {
            let block_bits = one_hot(l.p, d) as u128;
            idx |= block_bits << (q - (j + 1) * l.p);
        }
        idx
    }

    #[test]
    fn m_stage_subtracts_digit_sum() {
        for (p, n) in [(2usize, 3usize), (3, 2), (5, 1)] {
            let l = ModpLayout { p, n };
            let c = build_modp_m_stage(p, n).unwrap();
            let count = p.pow(n as u32 + 1);
            for code in 0..count {
                let mut digits = Vec::new();
                let mut r = code;
                for _ in 0..=n {
                    digits.push(r % p);
                    r /= p;
                }
                let (out, phase) = c.run_basis(encode(&l, &digits)).unwrap();
                let sum: usize = digits[1..].iter().sum();
                let mut want = digits.clone();
                want[0] = (digits[0] + p * n - sum % p) % p;
                assert_eq!(out, encode(&l, &want), "p={p} digits={digits:?}");
                assert_eq!(phase.re, 1.0);
            }
        }
    }

    #[test]
    fn layout_sizes() {
        let c = build_modp_fanout(2, 4).unwrap();
        assert_eq!(c.qubit_count(), 14);
        assert_eq!(c.role("cat").unwrap().len(), 10);
        assert!(matches!(build_modp_fanout(4, 2), Err(Error::NotPrime(4))));
    }
}
