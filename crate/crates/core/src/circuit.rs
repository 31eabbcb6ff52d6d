//! Layered circuits and their builder.
//!
//! Depth counts layers that contain a multi-qubit gate; single-qubit
//! layers are free. Size counts multi-qubit gates.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gates::{GateInstance, GateKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub construction: String,
    #[serde(default)]
    pub params: Value,
    /// Named wire groups such as `inputs`, `output`, `targets`.
    #[serde(default)]
    pub roles: BTreeMap<String, Vec<usize>>,
    pub qubits: usize,
    pub layers: Vec<Vec<GateInstance>>,
}

impl Circuit {
    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateInstance> {
        self.layers.iter().flatten()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn depth(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| l.iter().any(GateInstance::is_multi_qubit))
            .count()
    }

    pub fn size(&self) -> usize {
        self.gates().filter(|g| g.is_multi_qubit()).count()
    }

    pub fn role(&self, name: &str) -> Result<&[usize]> {
        self.roles
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidParameter(format!("circuit has no {name:?} role")))
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    pub fn with_role(mut self, name: &str, wires: Vec<usize>) -> Self {
        self.roles.insert(name.to_string(), wires);
        self
    }

    /// Check wire ranges, gate well-formedness and layer disjointness.
    pub fn validate(&self) -> Result<()> {
        for layer in &self.layers {
            let mut used = vec![false; self.qubits];
            for gate in layer {
                GateInstance::new(gate.kind().clone(), gate.wires().to_vec(), gate.label())?;
                for &w in gate.wires() {
                    if w >= self.qubits {
                        return Err(Error::IndexOutOfRange {
                            index: w,
                            qubits: self.qubits,
                        });
                    }
                    if used[w] {
                        return Err(Error::OverlappingWires(w));
                    }
                    used[w] = true;
                }
            }
        }
        for (name, wires) in &self.roles {
            if let Some(&w) = wires.iter().find(|&&w| w >= self.qubits) {
                return Err(Error::InvalidParameter(format!(
                    "role {name:?} names wire {w} outside 0..{}",
                    self.qubits
                )));
            }
        }
        Ok(())
    }

    /// Adjoint circuit: layers reversed, every gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            construction: format!("{}^dag", self.construction),
            params: self.params.clone(),
            roles: self.roles.clone(),
            qubits: self.qubits,
            layers: self
                .layers
                .iter()
                .rev()
                .map(|l| l.iter().rev().map(GateInstance::inverse).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let c: Circuit = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Run a classical circuit on one basis state, returning the output
    /// basis index and the accumulated phase. Fails on any gate that does
    /// not map basis states to basis states.
    pub fn run_basis(&self, input: u128) -> Result<(u128, Complex64)> {
        if self.qubits > 128 {
            return Err(Error::InvalidParameter("basis runner supports at most 128 qubits".into()));
        }
        let mut state = input;
        let mut phase = Complex64::new(1.0, 0.0);
        for gate in self.gates() {
            let (s, ph) = apply_basis(gate, self.qubits, state)?;
            state = s;
            phase *= ph;
        }
        Ok((state, phase))
    }
}

#[inline]
fn get_bit(state: u128, q: usize, w: usize) -> bool {
    state >> (q - 1 - w) & 1 == 1
}

fn gather128(state: u128, q: usize, wires: &[usize]) -> u64 {
    wires
        .iter()
        .fold(0u64, |acc, &w| (acc << 1) | get_bit(state, q, w) as u64)
}

fn scatter128(mut state: u128, q: usize, wires: &[usize], value: u64) -> u128 {
    let k = wires.len();
    for (i, &w) in wires.iter().enumerate() {
        let m = 1u128 << (q - 1 - w);
        if value >> (k - 1 - i) & 1 == 1 {
            state |= m;
        } else {
            state &= !m;
        }
    }
    state
}

fn apply_basis(gate: &GateInstance, q: usize, state: u128) -> Result<(u128, Complex64)> {
    let wires = gate.wires();
    let one = Complex64::new(1.0, 0.0);
    match gate.kind() {
        GateKind::PhasePredicate(p) => {
            let sign = if p.eval(gather128(state, q, wires)) { -one } else { one };
            Ok((state, sign))
        }
        GateKind::FlipPredicate(p) => {
            let (target, controls) = wires.split_last().expect("validated flip gate");
            if p.eval(gather128(state, q, controls)) {
                Ok((state ^ (1u128 << (q - 1 - target)), one))
            } else {
                Ok((state, one))
            }
        }
        GateKind::WirePermutation(perm) => {
            let mut out = state;
            for (i, &p) in perm.iter().enumerate() {
                let m = 1u128 << (q - 1 - wires[p]);
                if get_bit(state, q, wires[i]) {
                    out |= m;
                } else {
                    out &= !m;
                }
            }
            Ok((out, one))
        }
        GateKind::Unitary(u) => {
            let col = gather128(state, q, wires) as usize;
            let mut hit = None;
            for row in 0..u.nrows() {
                let z = u[[row, col]];
                if z.norm() > 1e-12 {
                    if hit.is_some() || (z.norm() - 1.0).abs() > 1e-12 {
                        return Err(Error::NotClassical(gate.label().to_string()));
                    }
                    hit = Some((row, z));
                }
            }
            let (row, z) = hit.ok_or_else(|| Error::NotClassical(gate.label().to_string()))?;
            Ok((scatter128(state, q, wires, row as u64), z))
        }
    }
}

/// Accumulates gates in program order and schedules them into layers.
///
/// A multi-qubit gate lands in the earliest multi-qubit layer after every
/// multi-qubit gate it depends on; single-qubit gates fill the free
/// sublayers in between. The resulting depth is the multi-qubit longest
/// path of the gate sequence.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    qubits: usize,
    gates: Vec<GateInstance>,
    roles: BTreeMap<String, Vec<usize>>,
    params: Value,
}

impl CircuitBuilder {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits,
            gates: Vec::new(),
            roles: BTreeMap::new(),
            params: Value::Null,
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn push(&mut self, gate: GateInstance) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = GateInstance>) -> &mut Self {
        self.gates.extend(gates);
        self
    }

    /// Append every gate of `other`, wire `w` mapped to `map[w]`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<&mut Self> {
        if map.len() != other.qubits {
            return Err(Error::LengthMismatch {
                expected: other.qubits,
                found: map.len(),
            });
        }
        for g in other.gates() {
            self.gates.push(g.remap(map)?);
        }
        Ok(self)
    }

    /// Append the inverse of `other`, wire `w` mapped to `map[w]`.
    pub fn append_inverse_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<&mut Self> {
        self.append_mapped(&other.inverse(), map)
    }

    pub fn role(&mut self, name: &str, wires: Vec<usize>) -> &mut Self {
        self.roles.insert(name.to_string(), wires);
        self
    }

    pub fn params(&mut self, params: Value) -> &mut Self {
        self.params = params;
        self
    }

    pub fn build(&self, construction: &str) -> Circuit {
        Circuit {
            construction: construction.to_string(),
            params: self.params.clone(),
            roles: self.roles.clone(),
            qubits: self.qubits,
            layers: schedule(self.qubits, &self.gates),
        }
    }

    /// Build and check every structural invariant.
    pub fn build_checked(&self, construction: &str) -> Result<Circuit> {
        let c = self.build(construction);
        c.validate()?;
        Ok(c)
    }
}

fn grow<T>(v: &mut Vec<Vec<T>>, n: usize) {
    while v.len() <= n {
        v.push(Vec::new());
    }
}

fn schedule(qubits: usize, gates: &[GateInstance]) -> Vec<Vec<GateInstance>> {
    // Stage s = single-qubit sublayers S_s[..] followed by multi layer M_s.
    let mut level = vec![0usize; qubits.max(1)];
    let mut sub = vec![0usize; qubits.max(1)];
    let mut singles: Vec<Vec<Vec<GateInstance>>> = Vec::new();
    let mut multis: Vec<Vec<GateInstance>> = Vec::new();
    for g in gates {
        let ws = g.wires();
        let in_range = ws.iter().all(|&w| w < qubits);
        if !in_range {
            // Left for validate() to report.
            multis.push(vec![g.clone()]);
            continue;
        }
        if g.is_multi_qubit() {
            let l = ws.iter().map(|&w| level[w]).max().unwrap_or(0);
            grow(&mut multis, l);
            multis[l].push(g.clone());
            for &w in ws {
                level[w] = l + 1;
                sub[w] = 0;
            }
        } else {
            let mut l = 0;
            let mut s = 0;
            for &w in ws {
                l = level[w];
                s = sub[w];
                sub[w] += 1;
            }
            grow(&mut singles, l);
            grow(&mut singles[l], s);
            singles[l][s].push(g.clone());
        }
    }
    let stages = singles.len().max(multis.len());
    let mut layers = Vec::new();
    for s in 0..stages {
        if let Some(sl) = singles.get_mut(s) {
            layers.extend(sl.drain(..).filter(|l| !l.is_empty()));
        }
        if let Some(ml) = multis.get_mut(s) {
            if !ml.is_empty() {
                layers.push(std::mem::take(ml));
            }
        }
    }
    layers
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;

    #[test]
    fn depth_ignores_single_qubit_layers() {
        let mut b = CircuitBuilder::new(3);
        b.push(gates::h(0))
            .push(gates::h(0))
            .push(gates::cnot(0, 1))
            .push(gates::x(2))
            .push(gates::h(1))
            .push(gates::cz(1, 2))
            .push(gates::cnot(0, 2));
        let c = b.build("t");
        c.validate().unwrap();
        assert_eq!(c.depth(), 3);
        assert_eq!(c.size(), 3);
        assert_eq!(c.gate_count(), 7);
    }

    #[test]
    fn parallel_multi_gates_share_a_layer() {
        let mut b = CircuitBuilder::new(4);
        b.push(gates::cnot(0, 1)).push(gates::cnot(2, 3)).push(gates::h(0)).push(gates::cz(0, 2));
        let c = b.build("t");
        assert_eq!(c.depth(), 2);
        assert_eq!(c.layers[0].len(), 2);
    }

    #[test]
    fn scheduling_preserves_semantics() {
        use crate::statevector::circuit_to_matrix;
        let mut b = CircuitBuilder::new(3);
        b.push(gates::h(0))
            .push(gates::cnot(0, 1))
            .push(gates::h(1))
            .push(gates::x(1))
            .push(gates::cz(1, 2))
            .push(gates::h(2))
            .push(gates::cnot(2, 0));
        let c = b.build("t");
        let mut seq = c.clone();
        seq.layers = b.gates.iter().map(|g| vec![g.clone()]).collect();
        let a = circuit_to_matrix(&c).unwrap();
        let s = circuit_to_matrix(&seq).unwrap();
        assert!(a.max_abs_diff(&s).unwrap() < 1e-15);
    }

    #[test]
    fn validate_rejects_overlap() {
        let c = Circuit {
            construction: "bad".into(),
            params: Value::Null,
            roles: BTreeMap::new(),
            qubits: 2,
            layers: vec![vec![gates::h(0), gates::cnot(0, 1)]],
        };
        assert!(matches!(c.validate(), Err(Error::OverlappingWires(0))));
        let c = Circuit {
            layers: vec![vec![gates::h(3)]],
            ..c
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut b = CircuitBuilder::new(3);
        b.push(gates::h(0))
            .push(gates::q_tilde_gate(2, &[1, 2]).unwrap())
            .push(gates::u_sigma_power(2, 1, &[1, 2]).unwrap())
            .role("inputs", vec![0])
            .params(serde_json::json!({"n": 2}));
        let c = b.build("demo");
        let back = Circuit::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn basis_runner() {
        let mut b = CircuitBuilder::new(3);
        b.push(gates::x(0)).push(gates::cnot(0, 2)).push(gates::cz(0, 2));
        let c = b.build("t");
        let (out, ph) = c.run_basis(0).unwrap();
        assert_eq!(out, 0b101);
        assert_eq!(ph, Complex64::new(-1.0, 0.0));
        let mut b = CircuitBuilder::new(1);
        b.push(gates::h(0));
        assert!(matches!(b.build("h").run_basis(0), Err(Error::NotClassical(_))));
    }

    #[test]
    fn inverse_undoes() {
        use crate::statevector::{circuit_to_matrix, DenseOperator};
        let mut b = CircuitBuilder::new(3);
        b.push(gates::h(0))
            .push(gates::q_tilde_gate(2, &[1, 2]).unwrap())
            .push(gates::u_sigma_power(3, 1, &[0, 1, 2]).unwrap())
            .push(gates::cnot(0, 2));
        let c = b.build("t");
        let mut both = CircuitBuilder::new(3);
        both.append_mapped(&c, &[0, 1, 2]).unwrap();
        both.append_inverse_mapped(&c, &[0, 1, 2]).unwrap();
        let m = circuit_to_matrix(&both.build("id")).unwrap();
        assert!(m.max_abs_diff(&DenseOperator::identity(8)).unwrap() < 1e-12);
    }
}
