use serde_json::json;

use crate::circuit::{Circuit, CircuitBuilder};
use crate::error::{Error, Result};
use crate::gates;

/// `H` then a CNOT ladder: `|0^n> -> (|0^n> + |1^n>)/sqrt 2`.
pub fn cat_state_preparer(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidParameter("cat state needs n >= 1".into()));
    }
    let mut b = CircuitBuilder::new(n);
    b.push(gates::h(0));
    for i in 0..n - 1 {
        b.push(gates::cnot(i, i + 1));
    }
    b.role("targets", (0..n).collect()).params(json!({"n": n}));
    b.build_checked("cat")
}

/// `Fanout` from wire 0 onto wires `1..n`: maps
/// `(a|0> + b|1>)|0^{n-1}>` to `a|0^n> + b|1^n>`.
pub fn fanout_catlike(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidParameter("catlike circuit needs n >= 1".into()));
    }
    let mut b = CircuitBuilder::new(n);
    if n > 1 {
        b.extend(gates::fanout_gates(0, &(1..n).collect::<Vec<_>>())?);
    }
    b.role("input", vec![0]).role("cat", (0..n).collect()).params(json!({"n": n}));
    b.build_checked("fanout-catlike")
}

/// Parity from a nekomata preparer `C`:
/// `C, CZ(x_i, t_i), C^dag, OR(all preparer wires -> out), C, CZ, C^dag`.
///
/// Layout: `x` on `0..n`, the preparer on `n..n+m`, the output on `n+m`.
/// The preparer's first `n` `targets` receive the `CZ`s.
pub fn build_nekomata_to_parity(preparer: &Circuit, n: usize) -> Result<Circuit> {
    let targets = preparer.role("targets")?;
    if targets.len() < n || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "preparer exposes {} targets, need {n} >= 1",
            targets.len()
        )));
    }
    let m = preparer.qubit_count();
    let map: Vec<usize> = (n..n + m).collect();
    let out = n + m;
    let mut b = CircuitBuilder::new(n + m + 1);
    let czs = |b: &mut CircuitBuilder| {
        for i in 0..n {
            b.push(gates::cz(i, map[targets[i]]));
        }
    };
    b.append_mapped(preparer, &map)?;
    czs(&mut b);
    b.append_inverse_mapped(preparer, &map)?;
    b.push(gates::or_gate(&map, out)?);
    b.append_mapped(preparer, &map)?;
    czs(&mut b);
    b.append_inverse_mapped(preparer, &map)?;
    b.role("inputs", (0..n).collect())
        .role("output", vec![out])
        .role("ancillas", map.clone())
        .role("targets", targets[..n].iter().map(|&t| map[t]).collect())
        .params(json!({"n": n, "preparer": preparer.construction, "preparer_params": preparer.params}));
    b.build_checked("fig2-parity")
}

/// Parity from a catlike circuit: `H(b), C, CZ(x_i, cat_i), C^dag, H(b)`.
///
/// Layout: `x` on `0..n`, then the catlike circuit; the output is the
/// catlike circuit's input wire.
pub fn build_cat_to_parity(catlike: &Circuit, n: usize) -> Result<Circuit> {
    let input = catlike.role("input")?;
    let cat = catlike.role("cat")?;
    if input.len() != 1 || cat.first() != input.first() || cat.len() < n || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "catlike circuit must expose one input wire starting a cat of at least {n} wires"
        )));
    }
    let q = catlike.qubit_count();
    let map: Vec<usize> = (n..n + q).collect();
    let out = map[input[0]];
    let mut b = CircuitBuilder::new(n + q);
    b.push(gates::h(out));
    b.append_mapped(catlike, &map)?;
    for i in 0..n {
        b.push(gates::cz(i, map[cat[i]]));
    }
    b.append_inverse_mapped(catlike, &map)?;
    b.push(gates::h(out));
    b.role("inputs", (0..n).collect())
        .role("output", vec![out])
        .role("ancillas", map.iter().copied().filter(|&w| w != out).collect())
        .params(json!({"n": n, "catlike": catlike.construction, "catlike_params": catlike.params}));
    b.build_checked("cat-parity")
}

/// `H` on `wires`, the circuit, `H` on `wires` again.
pub fn conjugate_by_hadamards(circuit: &Circuit, wires: &[usize]) -> Result<Circuit> {
    let q = circuit.qubit_count();
    let mut b = CircuitBuilder::new(q);
    b.extend(wires.iter().map(|&w| gates::h(w)));
    b.append_mapped(circuit, &(0..q).collect::<Vec<_>>())?;
    b.extend(wires.iter().map(|&w| gates::h(w)));
    for (k, v) in &circuit.roles {
        b.role(k, v.clone());
    }
    b.params(circuit.params.clone());
    b.build_checked(&format!("H-conjugated {}", circuit.construction))
}

/// `Fanout_n` from a catlike circuit: the cat-to-parity circuit conjugated
/// by Hadamards on its inputs and output. The source is role `source`,
/// the fanned-out wires are role `targets`.
pub fn build_moore_fanout(catlike: &Circuit, n: usize) -> Result<Circuit> {
    let parity = build_cat_to_parity(catlike, n)?;
    let source = parity.role("output")?[0];
    let mut wires: Vec<usize> = (0..n).collect();
    wires.push(source);
    let mut c = conjugate_by_hadamards(&parity, &wires)?;
    c.construction = "moore-fanout".into();
    c.roles.insert("source".into(), vec![source]);
    c.roles.insert("targets".into(), (0..n).collect());
    Ok(c)
}
