use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bits;
use crate::circuit::{Circuit, CircuitBuilder};
use crate::error::{Error, Result};
use crate::fsets::{is_unique_completion, restrict_fixing_indices, span_enumerate, subs_complement_basis, ParityRestrictedSet};
use crate::gates::{self, GateInstance};

/// Parity-class indicator of `x` written into one output bit.
///
/// Layout: `x` on `0..n`, the output on `n`, then one `n`-wire block per
/// element of `Span(t)` and one flag per block. Block `j` receives
/// `x XOR y_j`, its flag is the membership of that string in `S`, and the
/// output is the OR of all flags; the compute half is then mirrored.
pub fn build_subs_parity(set: &ParityRestrictedSet, c: usize) -> Result<Circuit> {
    let n = set.n();
    let basis = subs_complement_basis(set, c)?;
    let span = span_enumerate(&basis)?;
    let blocks = span.len();
    let out = n;
    let block = |j: usize| -> Vec<usize> { (n + 1 + j * n..n + 1 + (j + 1) * n).collect() };
    let flag = |j: usize| n + 1 + blocks * n + j;
    let pred = set.to_predicate()?;

    let mut compute = Vec::new();
    for (j, &y) in span.iter().enumerate() {
        let wires = block(j);
        for i in 0..n {
            compute.push(gates::cnot(i, wires[i]));
        }
        for i in 0..n {
            if bits::bit(y, n, i) {
                compute.push(gates::x(wires[i]));
            }
        }
        compute.push(gates::flag_membership(pred.clone(), &wires, flag(j))?);
    }
    let flags: Vec<usize> = (0..blocks).map(flag).collect();
    let mut b = CircuitBuilder::new(n + 1 + blocks * (n + 1));
    b.extend(compute.iter().cloned());
    b.push(gates::or_gate(&flags, out)?);
    b.extend(compute.iter().rev().map(GateInstance::inverse));
    b.role("inputs", (0..n).collect())
        .role("output", vec![out])
        .role("ancillas", (n + 1..n + 1 + blocks * (n + 1)).collect())
        .params(json!({
            "n": n,
            "set": set.to_text(),
            "c": c,
            "basis": basis.vectors.iter().map(|&t| bits::format(t, n)).collect::<Vec<_>>(),
        }));
    b.build_checked("subs-parity")
}

/// Shape of an AND tree of `U_S`-realized Toffoli nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeReport {
    /// Word length of every node's `U_S`.
    pub word: usize,
    pub member: String,
    pub fixed: Vec<usize>,
    pub arity: usize,
    pub levels: usize,
    pub nodes: usize,
    pub level_bound: usize,
}

struct Node {
    set: ParityRestrictedSet,
    s: u64,
    fixed: Vec<usize>,
    free: Vec<usize>,
}

impl Node {
    /// One Toffoli: fixed positions and unused free positions come from
    /// fresh ancillas set to `s`; signals are dressed so that `1` reads as
    /// the completion bit of their position.
    fn gates(&self, signals: &[usize], target: usize, alloc: &mut usize) -> Result<Vec<GateInstance>> {
        let k = self.set.n();
        let mut word = vec![usize::MAX; k];
        let mut dress = Vec::new();
        for &i in &self.fixed {
            word[i] = *alloc;
            *alloc += 1;
            if bits::bit(self.s, k, i) {
                dress.push(gates::x(word[i]));
            }
        }
        for (slot, &i) in self.free.iter().enumerate() {
            let one = bits::bit(self.s, k, i);
            if let Some(&w) = signals.get(slot) {
                word[i] = w;
                if !one {
                    dress.push(gates::x(w));
                }
            } else {
                word[i] = *alloc;
                *alloc += 1;
                if one {
                    dress.push(gates::x(word[i]));
                }
            }
        }
        let mut out = dress.clone();
        out.push(gates::flag_membership(self.set.to_predicate()?, &word, target)?);
        out.extend(dress);
        Ok(out)
    }
}

fn plan_node(family: &dyn Fn(usize) -> Result<ParityRestrictedSet>, epsilon: Rational64, n: usize) -> Result<Node> {
    let (num, den) = (*epsilon.numer(), *epsilon.denom());
    if !(num > 0 && num < den) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let set = family(n)?;
    if set.n() != n {
        return Err(Error::InvalidParameter(format!(
            "family returned a set on {} bits for size {n}",
            set.n()
        )));
    }
    // |S| <= 2^{(1 - eps) n}  <=>  |S|^den <= 2^{(den - num) n}
    let lhs = num_traits::pow(set.size(), den as usize);
    let rhs = num_bigint::BigUint::from(1u8) << ((den - num) as usize * n);
    if lhs > rhs {
        return Err(Error::InvalidParameter(format!(
            "|S| = {} exceeds 2^((1 - {epsilon}) {n})",
            set.size()
        )));
    }
    let (s, fixed) = restrict_fixing_indices(&set)?;
    if !is_unique_completion(&set, s, &fixed)? {
        return Err(Error::CheckFailed("restriction has no unique completion".into()));
    }
    let free: Vec<usize> = (0..n).filter(|i| !fixed.contains(i)).collect();
    if free.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "node arity {} is below 2",
            free.len()
        )));
    }
    Ok(Node { set, s, fixed, free })
}

/// `AND_n` from flag-form `U_S` nodes with `|S| <= 2^{(1 - eps) n}`.
///
/// Every node restricts `S` to its unique completion on the free indices
/// and so computes an AND of `|free|` signals. Signals are grouped into
/// chunks of that arity until one node remains, which writes the output;
/// intermediate flags are uncomputed in reverse. Layout: `x` on `0..n`,
/// the output on `n`, then ancillas. The report is stored under
/// `params.tree`.
pub fn build_toffoli_from_small_us(
    family: &dyn Fn(usize) -> Result<ParityRestrictedSet>,
    epsilon: Rational64,
    n: usize,
) -> Result<Circuit> {
    let (circuit, _) = toffoli_tree(family, epsilon, n)?;
    Ok(circuit)
}

pub fn toffoli_tree(
    family: &dyn Fn(usize) -> Result<ParityRestrictedSet>,
    epsilon: Rational64,
    n: usize,
) -> Result<(Circuit, TreeReport)> {
    let node = plan_node(family, epsilon, n)?;
    let arity = node.free.len();
    let out = n;
    let mut alloc = n + 1;
    let mut signals: Vec<usize> = (0..n).collect();
    let mut compute = Vec::new();
    let mut levels = 0;
    let mut nodes = 0;
    while signals.len() > arity {
        let mut next = Vec::new();
        for chunk in signals.chunks(arity) {
            if chunk.len() == 1 {
                next.push(chunk[0]);
                continue;
            }
            let t = alloc;
            alloc += 1;
            compute.extend(node.gates(chunk, t, &mut alloc)?);
            nodes += 1;
            next.push(t);
        }
        signals = next;
        levels += 1;
    }
    let mut root = Vec::new();
    root.extend(node.gates(&signals, out, &mut alloc)?);
    levels += 1;
    nodes += 1;

    let level_bound = (epsilon.recip().ceil().to_integer() as usize) + 1;
    if levels > level_bound {
        return Err(Error::CheckFailed(format!(
            "tree has {levels} levels, bound is {level_bound}"
        )));
    }
    let report = TreeReport {
        word: n,
        member: bits::format(node.s, n),
        fixed: node.fixed.clone(),
        arity,
        levels,
        nodes,
        level_bound,
    };
    let mut b = CircuitBuilder::new(alloc);
    b.extend(compute.iter().cloned());
    b.extend(root);
    b.extend(compute.iter().rev().map(GateInstance::inverse));
    b.role("inputs", (0..n).collect())
        .role("output", vec![out])
        .role("ancillas", (n + 1..alloc).collect())
        .params(json!({
            "n": n,
            "epsilon": epsilon.to_string(),
            "set": node.set.to_text(),
            "tree": report,
        }));
    Ok((b.build_checked("toffoli-tree")?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run_bit(c: &Circuit, n: usize, x: u64) -> (bool, bool) {
        let q = c.qubit_count();
        let input = (x as u128) << (q - n);
        let (out, phase) = c.run_basis(input).unwrap();
        assert_eq!(phase.re, 1.0);
        let rest = out & !(((1u128 << n) - 1) << (q - n));
        let y = rest >> (q - n - 1) & 1 == 1;
        let clean = rest & !(1u128 << (q - n - 1)) == 0;
        assert_eq!(out >> (q - n), x as u128);
        (y, clean)
    }

    #[test]
    fn subs_parity_even_class() {
        for n in 2..=8 {
            let even: Vec<u64> = (0..1u64 << n).filter(|x| x.count_ones() % 2 == 0).collect();
            let set = ParityRestrictedSet::explicit(n, even).unwrap();
            let c = build_subs_parity(&set, 1).unwrap();
            for x in 0..1u64 << n {
                let (y, clean) = run_bit(&c, n, x);
                assert!(clean);
                assert_eq!(y, x.count_ones() % 2 == 0);
            }
        }
    }

    #[test]
    fn subs_parity_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 3..=8 {
            for parity in [0u8, 1] {
                let set = crate::fsets::sampling::random_set(&mut rng, n, 1 << (n - 2), parity).unwrap();
                let c = build_subs_parity(&set, 3).unwrap();
                for x in 0..1u64 << n {
                    let (y, clean) = run_bit(&c, n, x);
                    assert!(clean);
                    assert_eq!(y, (x.count_ones() % 2) as u8 == parity);
                }
            }
        }
    }

    #[test]
    fn toffoli_tree_is_and() {
        let family = |k: usize| {
            crate::fsets::sampling::random_set(&mut ChaCha8Rng::seed_from_u64(11), k, 1 << (k / 2), 0)
        };
        let c = build_toffoli_from_small_us(&family, Rational64::new(1, 2), 8).unwrap();
        for x in 0..256u64 {
            let (y, clean) = run_bit(&c, 8, x);
            assert!(clean);
            assert_eq!(y, x == 255);
        }
    }

    #[test]
    fn single_node_tree() {
        let family = |k: usize| ParityRestrictedSet::singleton(k, (1u64 << k) - 1);
        let (c, report) = toffoli_tree(&family, Rational64::new(1, 2), 4).unwrap();
        assert_eq!(report.levels, 1);
        assert_eq!(report.arity, 4);
        assert_eq!(c.size(), 1);
    }
}
