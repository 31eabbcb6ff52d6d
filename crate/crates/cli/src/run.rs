use nekomata::analysis::nekomata_fidelity;
use nekomata::statevector::{check_budget, run_circuit};
use nekomata::{bits, Circuit, StateVector};
use serde::Serialize;

use crate::cli::RunArgs;
use crate::{emit, exit_code, CmdResult};

#[derive(Serialize)]
struct Outcome {
    bits: String,
    probability: f64,
}

#[derive(Serialize)]
struct RunReport {
    construction: String,
    qubits: usize,
    depth: usize,
    size: usize,
    input: String,
    norm: f64,
    top: Vec<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
}

pub fn cmd_run(args: &RunArgs) -> CmdResult {
    let circuit = Circuit::from_json(&std::fs::read_to_string(&args.circuit)?)?;
    let q = circuit.qubit_count();
    check_budget("run", q)?;
    let input = args.input.clone().unwrap_or_else(|| "0".repeat(q));
    let state = run_circuit(&circuit, StateVector::basis_state(q, &input)?)?;

    let mut ranked: Vec<(usize, f64)> = state.probabilities().into_iter().enumerate().filter(|&(_, p)| p > 1e-15).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let top = ranked
        .into_iter()
        .take(args.top)
        .map(|(i, p)| Outcome {
            bits: bits::format(i as u64, q),
            probability: p,
        })
        .collect();
    let fidelity = match circuit.role("targets") {
        Ok(t) => Some(nekomata_fidelity(&state, t)?),
        Err(_) => None,
    };
    let report = RunReport {
        construction: circuit.construction.clone(),
        qubits: q,
        depth: circuit.depth(),
        size: circuit.size(),
        input,
        norm: state.norm(),
        top,
        fidelity,
    };
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(exit_code::PASS)
}
