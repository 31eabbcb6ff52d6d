use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::circuit::{Circuit, CircuitBuilder};
use crate::error::{Error, Result};
use crate::fsets::{ParityRestrictedSet, SetForm};
use crate::gates::{self, GateInstance};

/// How `U_S` is realized inside each reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsMode {
    /// One phase-predicate gate per `U_S`.
    Direct,
    /// Two thresholds kicking back onto a `|->` ancilla (slices only);
    /// `C^{n-1}Z` uses a threshold `k = n` on the same ancilla.
    ThresholdCompiled,
}

/// Column-major grid: wire `c*n + r` is row `r` of column `c`; column 0
/// holds the targets. Kickback ancillas (one per non-target column) follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridLayout {
    pub n: usize,
    pub m: usize,
    pub mode: UsMode,
}

impl GridLayout {
    pub fn wire(&self, column: usize, row: usize) -> usize {
        column * self.n + row
    }

    pub fn column(&self, c: usize) -> Vec<usize> {
        (0..self.n).map(|r| self.wire(c, r)).collect()
    }

    pub fn targets(&self) -> Vec<usize> {
        self.column(0)
    }

    /// Kickback ancilla of non-target column `c` (`1..=m`).
    pub fn ancilla(&self, c: usize) -> Option<usize> {
        match self.mode {
            UsMode::Direct => None,
            UsMode::ThresholdCompiled => Some(self.n * (self.m + 1) + c - 1),
        }
    }

    pub fn qubits(&self) -> usize {
        self.n * (self.m + 1)
            + match self.mode {
                UsMode::Direct => 0,
                UsMode::ThresholdCompiled => self.m,
            }
    }
}

fn slice_weight(set: &ParityRestrictedSet) -> Result<usize> {
    match set.form() {
        SetForm::HammingSlice { weight } => Ok(*weight),
        _ => Err(Error::InvalidParameter(
            "threshold-compiled U_S requires a Hamming slice".into(),
        )),
    }
}

fn us_gates(set: &ParityRestrictedSet, wires: &[usize], ancilla: Option<usize>, mode: UsMode) -> Result<Vec<GateInstance>> {
    match mode {
        UsMode::Direct => Ok(vec![gates::phase(set.to_predicate()?, wires, "U_S")?]),
        UsMode::ThresholdCompiled => {
            let anc = ancilla.ok_or_else(|| Error::InvalidParameter("missing kickback ancilla".into()))?;
            gates::exact_phase_gate(set.n(), slice_weight(set)?, wires, anc)
        }
    }
}

/// `I - 2|psi_S><psi_S|` as `H U_S H . X C^{n-1}Z X . H U_S H` on `wires`.
/// In threshold-compiled mode `ancilla` must already hold `|->`.
pub fn reflection_gates(
    set: &ParityRestrictedSet,
    wires: &[usize],
    ancilla: Option<usize>,
    mode: UsMode,
) -> Result<Vec<GateInstance>> {
    let n = set.n();
    if wires.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: wires.len(),
        });
    }
    let layer = |f: fn(usize) -> GateInstance| wires.iter().map(move |&w| f(w));
    let mut out = Vec::new();
    out.extend(layer(gates::h));
    out.extend(us_gates(set, wires, ancilla, mode)?);
    out.extend(layer(gates::h));
    out.extend(layer(gates::x));
    match mode {
        UsMode::Direct => out.push(gates::multi_cz(wires)?),
        UsMode::ThresholdCompiled => {
            let anc = ancilla.expect("checked by us_gates");
            out.push(gates::threshold_gate(n, n, anc, wires)?.with_label("C^{n-1}Z kickback"));
        }
    }
    out.extend(layer(gates::x));
    out.extend(layer(gates::h));
    out.extend(us_gates(set, wires, ancilla, mode)?);
    out.extend(layer(gates::h));
    Ok(out)
}

/// Stand-alone reflection on `n` wires (plus the kickback ancilla, wire
/// `n`, prepared and returned to `|0>` inside the circuit).
pub fn build_reflection(set: &ParityRestrictedSet, mode: UsMode) -> Result<Circuit> {
    let n = set.n();
    let wires: Vec<usize> = (0..n).collect();
    let mut b = CircuitBuilder::new(n + usize::from(mode == UsMode::ThresholdCompiled));
    match mode {
        UsMode::Direct => {
            b.extend(reflection_gates(set, &wires, None, mode)?);
        }
        UsMode::ThresholdCompiled => {
            b.push(gates::x(n)).push(gates::h(n));
            b.extend(reflection_gates(set, &wires, Some(n), mode)?);
            b.push(gates::h(n)).push(gates::x(n));
            b.role("ancillas", vec![n]);
        }
    }
    b.role("column", wires).params(json!({"n": n, "set": set.to_text(), "mode": mode}));
    b.build_checked("reflection")
}

/// The grid nekomata preparer.
///
/// Stage 1 sets every non-target column to `|1^n>`; stage 2 applies the
/// reflection to each non-target column; stage 3 applies, for every row,
/// a Toffoli from the `m` non-target bits of the row onto its target.
pub fn build_grid_nekomata(set: &ParityRestrictedSet, m: usize, mode: UsMode) -> Result<Circuit> {
    let n = set.n();
    if m == 0 {
        return Err(Error::InvalidParameter("grid needs at least one non-target column".into()));
    }
    if mode == UsMode::ThresholdCompiled {
        slice_weight(set)?;
    }
    let layout = GridLayout { n, m, mode };
    let mut b = CircuitBuilder::new(layout.qubits());
    for c in 1..=m {
        b.extend(layout.column(c).into_iter().map(gates::x));
        if let Some(a) = layout.ancilla(c) {
            b.push(gates::x(a)).push(gates::h(a));
        }
    }
    for c in 1..=m {
        b.extend(reflection_gates(set, &layout.column(c), layout.ancilla(c), mode)?);
    }
    for c in 1..=m {
        if let Some(a) = layout.ancilla(c) {
            b.push(gates::h(a)).push(gates::x(a));
        }
    }
    for r in 0..n {
        let controls: Vec<usize> = (1..=m).map(|c| layout.wire(c, r)).collect();
        b.push(gates::toffoli(&controls, layout.wire(0, r))?);
    }
    b.role("targets", layout.targets());
    if mode == UsMode::ThresholdCompiled {
        b.role("ancillas", (1..=m).filter_map(|c| layout.ancilla(c)).collect());
    }
    b.params(json!({"n": n, "set": set.to_text(), "m": m, "mode": mode}));
    b.build_checked("grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{circuit_to_matrix, mats, StateVector};
    use ndarray::Array2;
    use num_complex::Complex64;

    fn psi(set: &ParityRestrictedSet) -> StateVector {
        let n = set.n();
        let mut s = StateVector::zero(n);
        for w in 0..n {
            s.apply_single_qubit(w, &mats::H).unwrap();
        }
        let wires: Vec<usize> = (0..n).collect();
        s.apply_phase_predicate(&wires, &set.to_predicate().unwrap()).unwrap();
        for w in 0..n {
            s.apply_single_qubit(w, &mats::H).unwrap();
        }
        s
    }

    fn reflection_matrix(v: &StateVector) -> Array2<Complex64> {
        let a = v.amplitudes();
        let d = a.len();
        Array2::from_shape_fn((d, d), |(i, j)| {
            let e = if i == j { 1.0 } else { 0.0 };
            Complex64::new(e, 0.0) - 2.0 * a[i] * a[j].conj()
        })
    }

    #[test]
    fn reflection_matches_outer_product() {
        let sets = [
            ParityRestrictedSet::from_bitstrings(2, &["11"]).unwrap(),
            ParityRestrictedSet::from_bitstrings(3, &["111", "100"]).unwrap(),
            ParityRestrictedSet::hamming_slice(4, 2).unwrap(),
        ];
        for set in sets {
            let c = build_reflection(&set, UsMode::Direct).unwrap();
            assert_eq!(c.depth(), 3);
            let m = circuit_to_matrix(&c).unwrap();
            let want = reflection_matrix(&psi(&set));
            let diff = m.matrix().iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-10, "{diff}");
        }
    }

    #[test]
    fn psi_overlap_with_zero() {
        let set = ParityRestrictedSet::from_bitstrings(4, &["1111", "0011", "1010"]).unwrap();
        let v = psi(&set);
        assert!((v.amplitude(0).re - (1.0 - 3.0 / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn compiled_reflection_matches_direct() {
        for (n, w) in [(2, 1), (4, 2), (4, 1), (3, 3)] {
            let set = ParityRestrictedSet::hamming_slice(n, w).unwrap();
            let direct = circuit_to_matrix(&build_reflection(&set, UsMode::Direct).unwrap()).unwrap();
            let compiled = build_reflection(&set, UsMode::ThresholdCompiled).unwrap();
            let iso = crate::statevector::circuit_isometry(&compiled, &(0..n).collect::<Vec<_>>()).unwrap();
            let want = crate::statevector::embed_ideal(&direct, n + 1, &(0..n).collect::<Vec<_>>()).unwrap();
            assert!(iso.max_abs_diff(&want).unwrap() < 1e-10);
        }
    }

    #[test]
    fn grid_audit() {
        let set = ParityRestrictedSet::from_bitstrings(3, &["111"]).unwrap();
        for m in 1..=5 {
            let c = build_grid_nekomata(&set, m, UsMode::Direct).unwrap();
            assert_eq!(c.qubit_count(), 3 * (m + 1));
            assert_eq!(c.depth(), 4);
            assert_eq!(c.size(), 3 * m + 3);
        }
        let slice = ParityRestrictedSet::hamming_slice(4, 2).unwrap();
        let c = build_grid_nekomata(&slice, 2, UsMode::ThresholdCompiled).unwrap();
        assert_eq!(c.qubit_count(), 4 * 3 + 2);
        assert_eq!(c.depth(), 6);
        assert!(build_grid_nekomata(&set, 2, UsMode::ThresholdCompiled).is_err());
        assert!(build_grid_nekomata(&set, 0, UsMode::Direct).is_err());
    }
}
