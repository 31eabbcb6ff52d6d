use std::collections::HashSet;

use nekomata::analysis::{
    basis_error_profile, nekomata_fidelity, qudit_mod_oracle, verify_grid_bounds, AnalysisMode, IdealGate,
};
use nekomata::constructions::{build_modp_fanout, build_modp_m_stage, build_moore_fanout, build_reflection, build_subs_parity, UsMode};
use nekomata::fsets::{restrict_fixing_indices, sampling, subs_complement_basis, ParityRestrictedSet};
use nekomata::gates::{self, ideal};
use nekomata::statevector::{
    check_budget, circuit_isometry, circuit_to_matrix, embed_ideal, operator_distance, run_circuit,
};
use nekomata::{bits, Circuit, CircuitBuilder, StateVector};
use clap::ValueEnum;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::build::{construct, need, parse_set, stream_rng};
use crate::cli::{AnalysisModeArg, Construction, Params, Preparer, Suite, VerifyArgs};
use crate::{emit, exit_code, CmdResult, Failure};

const EXACT_TOL: f64 = 1e-9;

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    values: Value,
}

#[derive(Serialize)]
struct Report {
    suite: String,
    pass: bool,
    checks: Vec<Check>,
}

fn check(name: &str, pass: bool, values: Value) -> Check {
    Check {
        name: name.to_string(),
        pass,
        values,
    }
}

fn logical(c: &Circuit) -> Result<Vec<usize>, Failure> {
    let mut w = c.role("output")?.to_vec();
    w.extend_from_slice(c.role("inputs")?);
    Ok(w)
}

fn grid_bounds(args: &VerifyArgs) -> Result<Vec<Check>, Failure> {
    let params = &args.params;
    let set = match &params.set {
        Some(_) => parse_set(params, "grid-bounds")?,
        None => {
            let n = need(params.n, "n", "grid-bounds")?;
            ParityRestrictedSet::hamming_slice(n, n / 2)?
        }
    };
    let mode = match args.analysis {
        AnalysisModeArg::Dense => AnalysisMode::Dense,
        AnalysisModeArg::Symmetric => AnalysisMode::Symmetric,
    };
    let r = verify_grid_bounds(&set, params.m, mode)?;
    let head = json!({"n": r.n, "set": set.to_text(), "m": r.m, "gamma1": r.gamma1, "non_vacuous": r.non_vacuous});
    Ok(vec![
        check("setup", true, head),
        check("p_all_one", r.flags.p_one, json!({"value": r.p_all_one, "bound": r.bound_p1})),
        check("p_bad", r.flags.p_bad, json!({"value": r.p_bad, "union": r.p_bad_union, "bound": r.bound_bad})),
        check("p_all_zero", r.flags.p_zero, json!({"value": r.p_all_zero, "bound": r.bound_p0})),
        check("fidelity", r.flags.fidelity, json!({"value": r.fidelity, "bound": r.bound_fidelity, "epsilon": r.epsilon})),
    ])
}

fn fig2(params: &Params) -> Result<Vec<Check>, Failure> {
    let circuit = construct(Construction::Fig2Parity, params)?;
    let n = circuit.role("inputs")?.len();
    let profile = basis_error_profile(&circuit, &IdealGate::Parity { n }, &logical(&circuit)?)?;
    let (limit, eps) = match params.preparer {
        Preparer::Cat => (EXACT_TOL, 0.0),
        Preparer::Grid => {
            let grid = construct(Construction::Grid, params)?;
            check_budget("grid preparer", grid.qubit_count())?;
            let state = run_circuit(&grid, StateVector::zero(grid.qubit_count()))?;
            let eps = 1.0 - nekomata_fidelity(&state, grid.role("targets")?)?;
            (2.0 * eps, eps)
        }
    };
    Ok(vec![check(
        "parity_error",
        profile.max_l2 <= limit,
        json!({"n": n, "qubits": circuit.qubit_count(), "max_l2": profile.max_l2, "limit": limit, "epsilon": eps}),
    )])
}

fn modp(params: &Params) -> Result<Vec<Check>, Failure> {
    let p = need(params.p, "p", "modp")?;
    let n = need(params.n, "n", "modp")?;
    let stage = build_modp_m_stage(p, n)?;
    let q = stage.qubit_count();
    let encode = |digits: &[usize]| -> u128 {
        digits
            .iter()
            .enumerate()
            .fold(0u128, |acc, (j, &d)| acc | (gates::one_hot(p, d) as u128) << (q - (j + 1) * p))
    };
    let mut mismatches = 0usize;
    let count = p.checked_pow(n as u32 + 1).filter(|&c| c <= 1 << 16).unwrap_or(1 << 16);
    for code in 0..count {
        let digits: Vec<usize> = (0..=n).map(|j| code / p.pow(j as u32) % p).collect();
        let sum: usize = digits[1..].iter().sum();
        let mut want = digits.clone();
        want[0] = (digits[0] + p - sum % p) % p;
        let (got, phase) = stage.run_basis(encode(&digits))?;
        if got != encode(&want) || (phase - 1.0).norm() > EXACT_TOL {
            mismatches += 1;
        }
    }
    let mut checks = vec![check("encoded_m_stage", mismatches == 0, json!({"inputs": count, "mismatches": mismatches}))];

    let fan = build_modp_fanout(p, n)?;
    let q = fan.qubit_count();
    check_budget("modp fanout", q)?;
    let cat_index: usize = fan.role("cat")?.iter().map(|&w| 1usize << (q - 1 - w)).sum();
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut input = vec![Complex64::new(0.0, 0.0); 1 << q];
    input[0] = amp;
    input[1 << (q - 1)] = amp;
    let out = run_circuit(&fan, StateVector::from_amplitudes(input)?)?;
    let mut want = vec![Complex64::new(0.0, 0.0); 1 << q];
    want[0] = amp;
    want[cat_index] = amp;
    let d = out.distance(&StateVector::from_amplitudes(want)?);
    checks.push(check("cat_output", d <= EXACT_TOL, json!({"p": p, "n": n, "qubits": q, "distance": d})));

    let moore = build_moore_fanout(&fan, n)?;
    let mut wires = moore.role("source")?.to_vec();
    wires.extend_from_slice(moore.role("targets")?);
    let iso = circuit_isometry(&moore, &wires)?;
    let d = operator_distance(&iso, &embed_ideal(&ideal::fanout(n), moore.qubit_count(), &wires)?)?;
    checks.push(check("fanout_from_cat", d <= EXACT_TOL, json!({"qubits": moore.qubit_count(), "distance": d})));
    Ok(checks)
}

fn moda(params: &Params) -> Result<Vec<Check>, Failure> {
    let p = need(params.p, "p", "moda")?;
    let n = need(params.n, "n", "moda")?;
    let (lhs, rhs) = qudit_mod_oracle(p, n)?;
    let frob = lhs.sub(&rhs)?.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(vec![check(
        "mod_equals_fourier_conjugated_increment",
        frob <= 1e-12,
        json!({"p": p, "n": n, "dimension": lhs.rows(), "frobenius": frob}),
    )])
}

fn random_parity_set(rng: &mut impl Rng, n: usize, min_size: usize) -> Result<ParityRestrictedSet, Failure> {
    let size = rng.gen_range(min_size..=1usize << (n - 1));
    let parity = rng.gen_range(0..2u8);
    Ok(sampling::random_set(rng, n, size, parity)?)
}

fn exact_bit_function(c: &Circuit, n: usize, f: impl Fn(u64) -> bool) -> Result<usize, Failure> {
    let q = c.qubit_count();
    let out = c.role("output")?[0];
    let mut wrong = 0;
    for x in 0..1u64 << n {
        let input = (x as u128) << (q - n);
        let (got, phase) = c.run_basis(input)?;
        let want = input | (f(x) as u128) << (q - 1 - out);
        if got != want || (phase - 1.0).norm() > EXACT_TOL {
            wrong += 1;
        }
    }
    Ok(wrong)
}

fn subs(args: &VerifyArgs) -> Result<Vec<Check>, Failure> {
    let params = &args.params;
    let c_max = params.c.unwrap_or(3).max(1);
    let mut rng = stream_rng(params.seed, 0);
    let (mut failures, mut needed_c) = (0usize, 0usize);
    let mut first_failure = Value::Null;
    for _ in 0..args.trials {
        let n = rng.gen_range(3..=10usize);
        let c = rng.gen_range(1..=c_max).min(n - 1);
        let set = random_parity_set(&mut rng, n, 1 << (n - c))?;
        let covered = match subs_complement_basis(&set, c) {
            Ok(basis) => {
                needed_c += usize::from(basis.len() == c);
                let span: Vec<u64> = (0..1u64 << basis.len())
                    .map(|mask| {
                        basis.vectors.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).fold(0, |a, (_, &t)| a ^ t)
                    })
                    .collect();
                let cover: HashSet<u64> =
                    set.members()?.iter().flat_map(|&s| span.iter().map(move |&y| s ^ y)).collect();
                basis.len() <= c && cover.len() == 1 << (n - 1)
            }
            Err(_) => false,
        };
        if !covered {
            failures += 1;
            if first_failure.is_null() {
                first_failure = json!({"set": set.to_text(), "c": c});
            }
        }
    }
    let mut checks = vec![check(
        "covering_bases",
        failures == 0,
        json!({"trials": args.trials, "failures": failures, "needed_c_vectors": needed_c, "first_failure": first_failure}),
    )];
    let n = params.n.unwrap_or(6).clamp(3, 10);
    let c = params.c.unwrap_or(2).clamp(1, n - 1);
    let set = match &params.set {
        Some(_) => parse_set(params, "subs")?,
        None => random_parity_set(&mut rng, n, 1 << (n - c))?,
    };
    let circuit = build_subs_parity(&set, c)?;
    let parity = set.parity();
    let wrong = exact_bit_function(&circuit, set.n(), |x| (x.count_ones() % 2) as u8 == parity)?;
    checks.push(check(
        "subs_circuit",
        wrong == 0,
        json!({"set": set.to_text(), "c": c, "qubits": circuit.qubit_count(), "wrong_inputs": wrong}),
    ));
    Ok(checks)
}

fn restrict(args: &VerifyArgs) -> Result<Vec<Check>, Failure> {
    let n = args.params.n.unwrap_or(10);
    if !(2..=20).contains(&n) {
        return Err(Failure::usage("restrict needs 2 <= n <= 20"));
    }
    let mut rng = stream_rng(args.params.seed, 1);
    let (mut failures, mut max_k) = (0usize, 0usize);
    for _ in 0..args.trials {
        let set = random_parity_set(&mut rng, n, 1)?;
        let (s, idx) = restrict_fixing_indices(&set)?;
        let members = set.members()?;
        let agree = members
            .iter()
            .filter(|&&x| idx.iter().all(|&i| bits::bit(x, n, i) == bits::bit(s, n, i)))
            .count();
        let bound = (members.len() as f64).log2().ceil() as usize;
        if !(members.contains(&s) && agree == 1 && idx.len() <= bound) {
            failures += 1;
        }
        max_k = max_k.max(idx.len());
    }
    Ok(vec![check(
        "unique_completion",
        failures == 0,
        json!({"n": n, "trials": args.trials, "failures": failures, "max_k": max_k}),
    )])
}

fn equivalences(params: &Params) -> Result<Vec<Check>, Failure> {
    let n = params.n.unwrap_or(4).clamp(1, 8);
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for k in 1..=n {
        let mut b = CircuitBuilder::new(k + 1);
        b.extend((0..=k).map(gates::h));
        b.push(gates::parity_gate(&(1..=k).collect::<Vec<_>>(), 0)?);
        b.extend((0..=k).map(gates::h));
        worst = worst.max(circuit_to_matrix(&b.build("h-parity-h"))?.max_abs_diff(&ideal::fanout(k))?);
    }
    checks.push(check("h_conjugated_parity_is_fanout", worst <= EXACT_TOL, json!({"max_n": n, "max_abs_diff": worst})));

    let even = 2 * n.div_ceil(2).max(1);
    let set = ParityRestrictedSet::hamming_slice(even, even / 2)?;
    let direct = build_reflection(&set, UsMode::Direct)?;
    let compiled = build_reflection(&set, UsMode::ThresholdCompiled)?;
    let column: Vec<usize> = (0..even).collect();
    let d = operator_distance(&circuit_isometry(&compiled, &column)?, &embed_ideal(&circuit_to_matrix(&direct)?, compiled.qubit_count(), &column)?)?;
    checks.push(check("compiled_reflection", d <= EXACT_TOL, json!({"set": set.to_text(), "distance": d})));

    let mut worst = 0.0f64;
    for m in 2..=3usize {
        for ell in 0..m {
            let q = n + 1 + (m - 1);
            let controls: Vec<usize> = (0..n).collect();
            let anc: Vec<usize> = (n + 1..q).collect();
            let mut direct = CircuitBuilder::new(q);
            direct.push(gates::mod_gate(n, m, ell, &controls, n)?);
            let mut compiled = CircuitBuilder::new(q);
            compiled.extend(gates::mod_gate_compiled(n, m, ell, &controls, &anc, n)?);
            let wires: Vec<usize> = (0..=n).collect();
            let a = circuit_isometry(&direct.build("mod"), &wires)?;
            let b = circuit_isometry(&compiled.build("mod-compiled"), &wires)?;
            worst = worst.max(operator_distance(&a, &b)?);
        }
    }
    checks.push(check("compiled_mod", worst <= EXACT_TOL, json!({"n": n, "distance": worst})));

    let mut worst = 0.0f64;
    for k in 0..=n {
        let controls: Vec<usize> = (0..n).collect();
        let mut b = CircuitBuilder::new(n + 1);
        b.push(gates::x(n)).push(gates::h(n));
        b.extend(gates::exact_phase_gate(n, k, &controls, n)?);
        b.push(gates::h(n)).push(gates::x(n));
        let got = circuit_isometry(&b.build("exact-phase"), &controls)?;
        let pred = nekomata::BitPredicate::truth_set(n, (0..1u64 << n).filter(|x| x.count_ones() as usize == k))?;
        let mut want = CircuitBuilder::new(n);
        want.push(gates::phase(pred, &controls, "slice phase")?);
        let want = embed_ideal(&circuit_to_matrix(&want.build("phase"))?, n + 1, &controls)?;
        worst = worst.max(operator_distance(&got, &want)?);
    }
    checks.push(check("exact_phase_by_kickback", worst <= EXACT_TOL, json!({"n": n, "distance": worst})));
    Ok(checks)
}

pub fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let checks = match args.suite {
        Suite::GridBounds => grid_bounds(args)?,
        Suite::Fig2 => fig2(&args.params)?,
        Suite::Modp => modp(&args.params)?,
        Suite::Moda => moda(&args.params)?,
        Suite::Subs => subs(args)?,
        Suite::Restrict => restrict(args)?,
        Suite::Equivalences => equivalences(&args.params)?,
    };
    let report = Report {
        suite: args.suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    };
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    match report.checks.iter().find(|c| !c.pass) {
        None => Ok(exit_code::PASS),
        Some(c) => Err(Failure::check(format!("check {} failed", c.name))),
    }
}
