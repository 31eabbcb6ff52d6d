//! Gate instances and the catalog of named gates.
//!
//! A flip gate lists its controls first and its target last. Every
//! catalog constructor returns either one [`GateInstance`] or, for compiled
//! forms, the gate sequence realizing it.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bits;
use crate::error::{Error, Result};
use crate::statevector::{check_permutation, mats, BitPredicate, Mat2, UNITARY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum GateKind {
    /// Dense unitary on `2^k` dimensions; `k = 1` is an ordinary
    /// single-qubit gate.
    #[serde(with = "matrix_serde")]
    Unitary(Array2<Complex64>),
    /// `(-1)^pred(x)` on the wires.
    PhasePredicate(BitPredicate),
    /// Target (last wire) XOR `pred(controls)`.
    FlipPredicate(BitPredicate),
    /// Content of `wires[i]` moves to `wires[perm[i]]`.
    WirePermutation(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateInstance {
    #[serde(flatten)]
    kind: GateKind,
    wires: Vec<usize>,
    #[serde(default)]
    label: String,
}

impl GateInstance {
    pub fn new(kind: GateKind, wires: Vec<usize>, label: impl Into<String>) -> Result<Self> {
        bits::check_distinct(&wires)?;
        match &kind {
            GateKind::Unitary(u) => {
                let dim = 1usize << wires.len();
                if u.dim() != (dim, dim) {
                    return Err(Error::DimensionMismatch(u.nrows(), u.ncols(), dim, dim));
                }
                let dev = unitarity_deviation(u);
                if dev > UNITARY_TOL {
                    return Err(Error::NonUnitary(dev));
                }
            }
            GateKind::PhasePredicate(p) => p.check_arity(wires.len())?,
            GateKind::FlipPredicate(p) => {
                if wires.is_empty() {
                    return Err(Error::InvalidParameter("flip gate without a target".into()));
                }
                p.check_arity(wires.len() - 1)?
            }
            GateKind::WirePermutation(perm) => {
                check_permutation(perm)?;
                if perm.len() != wires.len() {
                    return Err(Error::LengthMismatch {
                        expected: wires.len(),
                        found: perm.len(),
                    });
                }
            }
        }
        Ok(Self {
            kind,
            wires,
            label: label.into(),
        })
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn wires(&self) -> &[usize] {
        &self.wires
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Counted by the depth and size metrics.
    pub fn is_multi_qubit(&self) -> bool {
        self.wires.len() >= 2
    }

    /// Same gate acting on `map[w]` instead of `w`.
    pub fn remap(&self, map: &[usize]) -> Result<Self> {
        let wires = self
            .wires
            .iter()
            .map(|&w| {
                map.get(w).copied().ok_or(Error::IndexOutOfRange {
                    index: w,
                    qubits: map.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        bits::check_distinct(&wires)?;
        Ok(Self {
            kind: self.kind.clone(),
            wires,
            label: self.label.clone(),
        })
    }

    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            GateKind::Unitary(u) => GateKind::Unitary(u.t().mapv(|z| z.conj())),
            GateKind::WirePermutation(perm) => {
                let mut inv = vec![0; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    inv[p] = i;
                }
                GateKind::WirePermutation(inv)
            }
            k => k.clone(),
        };
        Self {
            kind,
            wires: self.wires.clone(),
            label: self.label.clone(),
        }
    }

    /// True for gates equal to their own inverse.
    pub fn is_self_inverse(&self) -> bool {
        match &self.kind {
            GateKind::PhasePredicate(_) | GateKind::FlipPredicate(_) => true,
            GateKind::Unitary(u) => {
                let sq = u.dot(u);
                sq.indexed_iter().all(|((i, j), z)| {
                    let e = if i == j { 1.0 } else { 0.0 };
                    (z - e).norm() <= UNITARY_TOL
                })
            }
            GateKind::WirePermutation(p) => p.iter().enumerate().all(|(i, &j)| p[j] == i),
        }
    }
}

fn unitarity_deviation(u: &Array2<Complex64>) -> f64 {
    let gram = u.t().mapv(|z| z.conj()).dot(u);
    gram.indexed_iter()
        .map(|((i, j), z)| (z - if i == j { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max)
}

mod matrix_serde {
    use ndarray::Array2;
    use num_complex::Complex64;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Array2<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = m
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<Complex64>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("unitary data must be a square matrix"));
        }
        let flat: Vec<Complex64> = rows
            .into_iter()
            .flatten()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Array2::from_shape_vec((n, n), flat).map_err(D::Error::custom)
    }
}

fn mat2_to_array(m: &Mat2) -> Array2<Complex64> {
    Array2::from_shape_fn((2, 2), |(i, j)| m[i][j])
}

fn build(kind: GateKind, wires: Vec<usize>, label: impl Into<String>) -> GateInstance {
    GateInstance::new(kind, wires, label).expect("catalog gate is well formed")
}

pub fn single_qubit(wire: usize, u: &Mat2, label: impl Into<String>) -> Result<GateInstance> {
    GateInstance::new(GateKind::Unitary(mat2_to_array(u)), vec![wire], label)
}

pub fn h(wire: usize) -> GateInstance {
    build(GateKind::Unitary(mat2_to_array(&mats::H)), vec![wire], "H")
}

pub fn x(wire: usize) -> GateInstance {
    build(GateKind::Unitary(mat2_to_array(&mats::X)), vec![wire], "X")
}

pub fn z(wire: usize) -> GateInstance {
    build(GateKind::Unitary(mat2_to_array(&mats::Z)), vec![wire], "Z")
}

pub fn cnot(control: usize, target: usize) -> GateInstance {
    build(
        GateKind::FlipPredicate(BitPredicate::AllOnes { arity: 1 }),
        vec![control, target],
        "CNOT",
    )
}

pub fn cz(a: usize, b: usize) -> GateInstance {
    build(
        GateKind::PhasePredicate(BitPredicate::AllOnes { arity: 2 }),
        vec![a, b],
        "CZ",
    )
}

/// `C^{k-1}Z` on `wires`: phase `-1` on the all-ones pattern.
pub fn multi_cz(wires: &[usize]) -> Result<GateInstance> {
    GateInstance::new(
        GateKind::PhasePredicate(BitPredicate::AllOnes { arity: wires.len() }),
        wires.to_vec(),
        format!("C^{}Z", wires.len().saturating_sub(1)),
    )
}

/// Generalized Toffoli: target flips iff every control is 1.
pub fn toffoli(controls: &[usize], target: usize) -> Result<GateInstance> {
    flip(BitPredicate::AllOnes { arity: controls.len() }, controls, target, format!("AND{}", controls.len()))
}

/// Target XOR the parity of `inputs`.
pub fn parity_gate(inputs: &[usize], target: usize) -> Result<GateInstance> {
    flip(
        BitPredicate::mod_eq(inputs.len(), 2, 1)?,
        inputs,
        target,
        format!("Parity{}", inputs.len()),
    )
}

/// Target flips iff some control is 1.
pub fn or_gate(controls: &[usize], target: usize) -> Result<GateInstance> {
    flip(
        BitPredicate::NotAllZeros { arity: controls.len() },
        controls,
        target,
        format!("OR{}", controls.len()),
    )
}

/// Flip gate with an arbitrary predicate.
pub fn flip(
    pred: BitPredicate,
    controls: &[usize],
    target: usize,
    label: impl Into<String>,
) -> Result<GateInstance> {
    if controls.contains(&target) {
        return Err(Error::OverlappingWires(target));
    }
    let mut wires = controls.to_vec();
    wires.push(target);
    GateInstance::new(GateKind::FlipPredicate(pred), wires, label)
}

pub fn phase(pred: BitPredicate, wires: &[usize], label: impl Into<String>) -> Result<GateInstance> {
    GateInstance::new(GateKind::PhasePredicate(pred), wires.to_vec(), label)
}

/// Flag-form membership oracle `|x>|q> -> |x>|q XOR 1_S(x)>`.
pub fn flag_membership(pred: BitPredicate, inputs: &[usize], target: usize) -> Result<GateInstance> {
    flip(pred, inputs, target, "U_S flag")
}

/// `Threshold_{n,k}`: target flips iff `|x| >= k`.
pub fn threshold_gate(n: usize, k: usize, target: usize, controls: &[usize]) -> Result<GateInstance> {
    if k > n {
        return Err(Error::InvalidParameter(format!("threshold k = {k} exceeds n = {n}")));
    }
    if controls.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: controls.len(),
        });
    }
    flip(BitPredicate::AtLeast { arity: n, k }, controls, target, format!("Threshold({n},{k})"))
}

/// Phase `(-1)^{[|x| = k]}` by kickback onto `ancilla`, which the caller
/// holds in `|->`: thresholds `k` and `k+1`, or one gate when `k = n`.
pub fn exact_phase_gate(
    n: usize,
    k: usize,
    controls: &[usize],
    ancilla: usize,
) -> Result<Vec<GateInstance>> {
    let mut out = vec![threshold_gate(n, k, ancilla, controls)?];
    if k < n {
        out.push(threshold_gate(n, k + 1, ancilla, controls)?);
    }
    Ok(out)
}

/// `U_S` for the middle Hamming slice, from two thresholds.
pub fn slice_us_gate(n: usize, wires: &[usize], ancilla: usize) -> Result<Vec<GateInstance>> {
    if n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "slice U_S needs even n, got {n}; pad with one ancilla"
        )));
    }
    exact_phase_gate(n, n / 2, wires, ancilla)
}

/// `MOD_{n,m,l}`: target flips iff `|x| = l (mod m)`.
pub fn mod_gate(n: usize, m: usize, ell: usize, controls: &[usize], target: usize) -> Result<GateInstance> {
    if controls.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: controls.len(),
        });
    }
    flip(BitPredicate::mod_eq(n, m, ell)?, controls, target, format!("MOD({n},{m},{ell})"))
}

/// `MOD_{n,m,l}` compiled to `MOD_{n+m-1,m,0}` with `m-1` ancillas (in
/// `|0>`): `(m-l) mod m` of them are set to 1 before and reset after.
pub fn mod_gate_compiled(
    n: usize,
    m: usize,
    ell: usize,
    controls: &[usize],
    ancillas: &[usize],
    target: usize,
) -> Result<Vec<GateInstance>> {
    if m < 2 || ell >= m {
        BitPredicate::mod_eq(n, m, ell)?;
    }
    if ancillas.len() != m - 1 {
        return Err(Error::LengthMismatch {
            expected: m - 1,
            found: ancillas.len(),
        });
    }
    let preset = &ancillas[..(m - ell) % m];
    let mut all = controls.to_vec();
    all.extend_from_slice(ancillas);
    let mut out: Vec<GateInstance> = preset.iter().map(|&a| x(a)).collect();
    out.push(mod_gate(n + m - 1, m, 0, &all, target)?);
    out.extend(preset.iter().map(|&a| x(a)));
    Ok(out)
}

pub fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn check_block(p: usize, block: &[usize]) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if block.len() != p {
        return Err(Error::LengthMismatch {
            expected: p,
            found: block.len(),
        });
    }
    Ok(())
}

/// Basis index (within a `p`-wire block) of the one-hot word `E|j>`.
pub fn one_hot(p: usize, j: usize) -> usize {
    1usize << (p - 1 - j)
}

/// The encoded Fourier transform: the `p`-point DFT on one-hot words,
/// identity on every other basis state of the block.
pub fn q_tilde_gate(p: usize, block: &[usize]) -> Result<GateInstance> {
    check_block(p, block)?;
    if p > 12 {
        return Err(Error::InvalidParameter(format!("encoded block of {p} wires is too large")));
    }
    let dim = 1usize << p;
    let mut u = Array2::<Complex64>::eye(dim);
    let scale = 1.0 / (p as f64).sqrt();
    for k in 0..p {
        let col = one_hot(p, k);
        u[[col, col]] = Complex64::new(0.0, 0.0);
        for j in 0..p {
            let angle = 2.0 * PI * ((j * k) % p) as f64 / p as f64;
            u[[one_hot(p, j), col]] = Complex64::from_polar(scale, angle);
        }
    }
    GateInstance::new(GateKind::Unitary(u), block.to_vec(), format!("Qtilde{p}"))
}

/// `U_sigma^k`: `E|j> -> E|j-k mod p>` as a block rotation.
pub fn u_sigma_power(p: usize, k: i64, block: &[usize]) -> Result<GateInstance> {
    check_block(p, block)?;
    let shift = k.rem_euclid(p as i64) as usize;
    let perm = (0..p).map(|i| (i + p - shift) % p).collect();
    GateInstance::new(
        GateKind::WirePermutation(perm),
        block.to_vec(),
        format!("Usigma^{shift}"),
    )
}

/// Controlled swap as `CNOT(b->a) . Toffoli(c,a->b) . CNOT(b->a)`.
pub fn controlled_swap(control: usize, a: usize, b: usize) -> Result<Vec<GateInstance>> {
    bits::check_distinct(&[control, a, b])?;
    Ok(vec![
        cnot(b, a),
        toffoli(&[control, a], b)?.with_label("CSWAP"),
        cnot(b, a),
    ])
}

/// Swaps whose product applies `perm` (content of position `i` ends at
/// `perm[i]`), at most `len - 1` of them.
pub fn transpositions(perm: &[usize]) -> Result<Vec<(usize, usize)>> {
    check_permutation(perm)?;
    let n = perm.len();
    // held[pos] = original position of the content now at pos
    let mut held: Vec<usize> = (0..n).collect();
    let mut at: Vec<usize> = (0..n).collect();
    let mut inv = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    let mut swaps = Vec::new();
    for pos in 0..n {
        let want = inv[pos];
        let cur = at[want];
        if cur != pos {
            swaps.push((pos, cur));
            let other = held[pos];
            held.swap(pos, cur);
            at[want] = pos;
            at[other] = cur;
        }
    }
    Ok(swaps)
}

/// `U_sigma^k` on `block`, applied iff `control` is 1.
pub fn controlled_u_sigma(p: usize, k: i64, control: usize, block: &[usize]) -> Result<Vec<GateInstance>> {
    check_block(p, block)?;
    if block.contains(&control) {
        return Err(Error::OverlappingWires(control));
    }
    let shift = k.rem_euclid(p as i64) as usize;
    let perm: Vec<usize> = (0..p).map(|i| (i + p - shift) % p).collect();
    let mut out = Vec::new();
    for (a, b) in transpositions(&perm)? {
        out.extend(controlled_swap(control, block[a], block[b])?);
    }
    Ok(out)
}

/// `Fanout_n` from `source` onto `targets` as `H`-conjugated parity.
pub fn fanout_gates(source: usize, targets: &[usize]) -> Result<Vec<GateInstance>> {
    let mut out: Vec<GateInstance> = Vec::with_capacity(2 * targets.len() + 3);
    out.push(h(source));
    out.extend(targets.iter().map(|&t| h(t)));
    out.push(parity_gate(targets, source)?.with_label(format!("Fanout{}", targets.len())));
    out.push(h(source));
    out.extend(targets.iter().map(|&t| h(t)));
    Ok(out)
}

pub mod ideal {
    //! Reference matrices of the named gates. Wire 0 is the distinguished
    //! bit `b`; wires `1..=n` carry `x`.
    use crate::statevector::DenseOperator;

    /// `|b, x> -> |b XOR parity(x), x>`.
    pub fn parity(n: usize) -> DenseOperator {
        let dim = 1usize << (n + 1);
        let xmask = (1usize << n) - 1;
        DenseOperator::from_basis_map(dim, |i| {
            let par = (i & xmask).count_ones() as usize & 1;
            i ^ (par << n)
        })
    }

    /// `|b, x> -> |b, x XOR b^n>`.
    pub fn fanout(n: usize) -> DenseOperator {
        let dim = 1usize << (n + 1);
        let xmask = (1usize << n) - 1;
        DenseOperator::from_basis_map(dim, |i| if i >> n & 1 == 1 { i ^ xmask } else { i })
    }

    /// `|b, x> -> |b XOR AND(x), x>`.
    pub fn and(n: usize) -> DenseOperator {
        let dim = 1usize << (n + 1);
        let xmask = (1usize << n) - 1;
        DenseOperator::from_basis_map(dim, |i| if i & xmask == xmask { i ^ (1 << n) } else { i })
    }

    /// `|b, x> -> |b XOR f(x), x>` for an arbitrary indicator.
    pub fn indicator(n: usize, f: impl Fn(u64) -> bool) -> DenseOperator {
        let dim = 1usize << (n + 1);
        let xmask = (1usize << n) - 1;
        DenseOperator::from_basis_map(dim, |i| {
            if f((i & xmask) as u64) {
                i ^ (1 << n)
            } else {
                i
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;
    use crate::statevector::{circuit_to_matrix, operator_distance, StateVector};

    fn matrix_of(q: usize, gates: Vec<GateInstance>) -> crate::statevector::DenseOperator {
        let mut b = CircuitBuilder::new(q);
        for g in gates {
            b.push(g);
        }
        circuit_to_matrix(&b.build("t")).unwrap()
    }

    #[test]
    fn threshold_examples() {
        assert!(threshold_gate(3, 4, 3, &[0, 1, 2]).is_err());
        let g = threshold_gate(3, 3, 3, &[0, 1, 2]).unwrap();
        assert_eq!(matrix_of(4, vec![g]), matrix_of(4, vec![toffoli(&[0, 1, 2], 3).unwrap()]));
        let mut s = StateVector::basis_state(4, "1010").unwrap();
        s.apply_gate(&threshold_gate(3, 2, 3, &[0, 1, 2]).unwrap()).unwrap();
        assert_eq!(s, StateVector::basis_state(4, "1011").unwrap());
        let mut s = StateVector::basis_state(4, "0000").unwrap();
        s.apply_gate(&threshold_gate(3, 0, 3, &[0, 1, 2]).unwrap()).unwrap();
        assert_eq!(s, StateVector::basis_state(4, "0001").unwrap());
    }

    #[test]
    fn exact_phase_matches_diagonal() {
        for n in 1..=5 {
            for k in 0..=n {
                let controls: Vec<usize> = (0..n).collect();
                let anc = n;
                // X, H prepares |->; H, X returns it.
                let mut gates = vec![x(anc), h(anc)];
                gates.extend(exact_phase_gate(n, k, &controls, anc).unwrap());
                gates.extend([h(anc), x(anc)]);
                let m = matrix_of(n + 1, gates);
                let dim = 1usize << (n + 1);
                // Ancilla (last wire) enters in |0>.
                for i in (0..dim).step_by(2) {
                    let xw = (i >> 1).count_ones() as usize;
                    let want = if xw == k { -1.0 } else { 1.0 };
                    for j in 0..dim {
                        let e = if i == j { want } else { 0.0 };
                        assert!((m.matrix()[[j, i]] - e).norm() < 1e-10, "n={n} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn slice_us_needs_even_n() {
        assert!(slice_us_gate(3, &[0, 1, 2], 3).is_err());
        assert_eq!(slice_us_gate(4, &[0, 1, 2, 3], 4).unwrap().len(), 2);
    }

    #[test]
    fn mod_gate_compiled_matches_direct() {
        for m in [2usize, 3, 5] {
            for n in 1..=8 {
                for ell in 0..m {
                    let controls: Vec<usize> = (0..n).collect();
                    let ancillas: Vec<usize> = (n..n + m - 1).collect();
                    let target = n + m - 1;
                    let direct = mod_gate(n, m, ell, &controls, target).unwrap();
                    let compiled = mod_gate_compiled(n, m, ell, &controls, &ancillas, target).unwrap();
                    let mut b = CircuitBuilder::new(n + m);
                    b.extend(compiled);
                    let circ = b.build("mod");
                    let mut d = CircuitBuilder::new(n + m);
                    d.push(direct);
                    let dc = d.build("mod");
                    for xv in 0..(1u128 << n) {
                        for tb in 0..2u128 {
                            let input = (xv << m) | tb;
                            assert_eq!(
                                circ.run_basis(input).unwrap(),
                                dc.run_basis(input).unwrap(),
                                "n={n} m={m} l={ell} x={xv}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mod2_ell1_is_parity() {
        let g = mod_gate(4, 2, 1, &[1, 2, 3, 4], 0).unwrap();
        let p = parity_gate(&[1, 2, 3, 4], 0).unwrap();
        assert_eq!(matrix_of(5, vec![g]), matrix_of(5, vec![p]));
    }

    #[test]
    fn q_tilde_examples() {
        let g = q_tilde_gate(2, &[0, 1]).unwrap();
        let mut s = StateVector::basis_state(2, "10").unwrap();
        s.apply_gate(&g).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(0b10).re - r).abs() < 1e-15);
        assert!((s.amplitude(0b01).re - r).abs() < 1e-15);
        assert!(q_tilde_gate(4, &[0, 1, 2, 3]).is_err());
        for p in [2usize, 3, 5] {
            let block: Vec<usize> = (0..p).collect();
            let g = q_tilde_gate(p, &block).unwrap();
            let u = matrix_of(p, vec![g.clone()]);
            let ui = matrix_of(p, vec![g.inverse()]);
            let prod = ui.dot(&u).unwrap();
            assert!(prod.max_abs_diff(&crate::statevector::DenseOperator::identity(1 << p)).unwrap() < 1e-10);
            let w = 2.0 * PI / p as f64;
            for j in 0..p {
                for k in 0..p {
                    let want = Complex64::from_polar(1.0 / (p as f64).sqrt(), w * (j * k) as f64);
                    assert!((u.matrix()[[one_hot(p, j), one_hot(p, k)]] - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn u_sigma_group_law() {
        for p in [2usize, 3, 5] {
            let block: Vec<usize> = (0..p).collect();
            for a in 0..p as i64 {
                for b in 0..p as i64 {
                    let ab = matrix_of(p, vec![u_sigma_power(p, a, &block).unwrap(), u_sigma_power(p, b, &block).unwrap()]);
                    let sum = matrix_of(p, vec![u_sigma_power(p, a + b, &block).unwrap()]);
                    assert_eq!(ab, sum);
                }
            }
            let id = matrix_of(p, vec![u_sigma_power(p, p as i64, &block).unwrap()]);
            assert_eq!(id, crate::statevector::DenseOperator::identity(1 << p));
        }
        let g = u_sigma_power(3, 1, &[0, 1, 2]).unwrap();
        let mut s = StateVector::basis_state(3, "001").unwrap();
        s.apply_gate(&g).unwrap();
        assert_eq!(s, StateVector::basis_state(3, "010").unwrap());
    }

    #[test]
    fn controlled_u_sigma_matches_permutation() {
        for p in [2usize, 3, 5] {
            let block: Vec<usize> = (1..=p).collect();
            for k in 0..p as i64 {
                let ctrl = controlled_u_sigma(p, k, 0, &block).unwrap();
                assert!(ctrl.len() <= 3 * (p - 1));
                let c = matrix_of(p + 1, ctrl);
                let plain = matrix_of(p, vec![u_sigma_power(p, k, &(0..p).collect::<Vec<_>>()).unwrap()]);
                let half = 1usize << p;
                for i in 0..half {
                    for j in 0..half {
                        let off = if i == j { 1.0 } else { 0.0 };
                        assert!((c.matrix()[[i, j]] - off).norm() < 1e-15);
                        assert!((c.matrix()[[half + i, half + j]] - plain.matrix()[[i, j]]).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn or_gate_examples() {
        for k in 1..=6 {
            let controls: Vec<usize> = (0..k).collect();
            let or = matrix_of(k + 1, vec![or_gate(&controls, k).unwrap()]);
            let alt = matrix_of(
                k + 1,
                vec![
                    x(k),
                    flip(BitPredicate::AllZeros { arity: k }, &controls, k, "Z0").unwrap(),
                ],
            );
            assert_eq!(or, alt);
        }
        assert!(or_gate(&[0, 1], 1).is_err());
    }

    #[test]
    fn threshold_monotone() {
        for n in 0..=10usize {
            for xv in 0..(1u64 << n) {
                for k in 0..n {
                    let a = BitPredicate::AtLeast { arity: n, k }.eval(xv);
                    let b = BitPredicate::AtLeast { arity: n, k: k + 1 }.eval(xv);
                    assert!(a >= b);
                }
            }
        }
    }

    #[test]
    fn parity_is_conjugated_fanout() {
        for n in 1..=6 {
            let inputs: Vec<usize> = (1..=n).collect();
            let f = matrix_of(n + 1, fanout_gates(0, &inputs).unwrap());
            assert!(operator_distance(&f, &ideal::fanout(n)).unwrap() < 1e-10);
            let p = matrix_of(n + 1, vec![parity_gate(&inputs, 0).unwrap()]);
            assert_eq!(p, ideal::parity(n));
            let mut conj = vec![];
            for w in 0..=n {
                conj.push(h(w));
            }
            conj.extend(fanout_gates(0, &inputs).unwrap());
            for w in 0..=n {
                conj.push(h(w));
            }
            let c = matrix_of(n + 1, conj);
            assert!(operator_distance(&c, &ideal::parity(n)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn transpositions_reproduce_permutation() {
        let perms = [vec![1, 2, 0], vec![2, 0, 1, 4, 3], vec![0, 1], vec![3, 2, 1, 0]];
        for perm in perms {
            let swaps = transpositions(&perm).unwrap();
            assert!(swaps.len() < perm.len());
            let mut content: Vec<usize> = (0..perm.len()).collect();
            for (a, b) in swaps {
                content.swap(a, b);
            }
            for (i, &p) in perm.iter().enumerate() {
                assert_eq!(content[p], i);
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        let gates = vec![
            h(0),
            q_tilde_gate(3, &[0, 1, 2]).unwrap(),
            u_sigma_power(3, 2, &[0, 1, 2]).unwrap(),
            threshold_gate(2, 1, 2, &[0, 1]).unwrap(),
            cz(0, 1),
        ];
        for g in gates {
            let text = serde_json::to_string(&g).unwrap();
            let back: GateInstance = serde_json::from_str(&text).unwrap();
            assert_eq!(back, g);
        }
        let text = serde_json::to_string(&cnot(0, 1)).unwrap();
        assert!(text.contains("\"kind\":\"flip_predicate\""));
    }
}
