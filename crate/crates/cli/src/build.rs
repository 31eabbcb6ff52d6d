use nekomata::constructions::{
    build_cat_to_parity, build_grid_nekomata, build_modp_fanout, build_nekomata_to_parity, build_subs_parity,
    build_toffoli_from_small_us, cat_state_preparer, compute_m, fanout_catlike, UsMode,
};
use nekomata::fsets::{sampling, ParityRestrictedSet};
use nekomata::Circuit;
use num_rational::Rational64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cli::{BuildArgs, Catlike, Construction, Family, Mode, Params, Preparer};
use crate::{emit, exit_code, CmdResult, Failure};

pub fn need<T: Copy>(value: Option<T>, flag: &str, what: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("{what} needs --{flag}")))
}

pub fn parse_set(params: &Params, what: &str) -> Result<ParityRestrictedSet, Failure> {
    let text = params
        .set
        .as_deref()
        .ok_or_else(|| Failure::usage(format!("{what} needs --set")))?;
    let set = ParityRestrictedSet::parse(text)?;
    if let Some(n) = params.n {
        if n != set.n() {
            return Err(Failure::usage(format!("--n {n} disagrees with a set on {} bits", set.n())));
        }
    }
    Ok(set)
}

/// Seeded generator for draw `stream` of a randomized suite.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn parse_epsilon(text: &str) -> Result<Rational64, Failure> {
    text.trim()
        .parse::<Rational64>()
        .map_err(|_| Failure::usage(format!("epsilon {text:?} is not a rational like 1/2")))
}

fn grid(params: &Params) -> Result<Circuit, Failure> {
    let set = parse_set(params, "grid")?;
    let m = match params.m {
        Some(m) => m,
        None => compute_m(set.n(), &set.size())?,
    };
    let mode = match params.us_mode {
        Mode::Direct => UsMode::Direct,
        Mode::ThresholdCompiled => UsMode::ThresholdCompiled,
    };
    Ok(build_grid_nekomata(&set, m, mode)?)
}

pub fn construct(construction: Construction, params: &Params) -> Result<Circuit, Failure> {
    let circuit = match construction {
        Construction::Grid => grid(params)?,
        Construction::Fig2Parity => {
            let (preparer, n) = match params.preparer {
                Preparer::Cat => {
                    let n = need(params.n, "n", "fig2-parity")?;
                    (cat_state_preparer(n)?, n)
                }
                Preparer::Grid => {
                    let g = grid(params)?;
                    let n = g.role("targets")?.len();
                    (g, n)
                }
            };
            build_nekomata_to_parity(&preparer, n)?
        }
        Construction::CatParity => {
            let n = need(params.n, "n", "cat-parity")?;
            let catlike = match params.catlike {
                Catlike::Fanout => fanout_catlike(n)?,
                Catlike::Modp => {
                    let p = need(params.p, "p", "a mod-p catlike circuit")?;
                    build_modp_fanout(p, n.div_ceil(2).saturating_sub(1).max(1))?
                }
            };
            build_cat_to_parity(&catlike, n)?
        }
        Construction::ModpFanout => build_modp_fanout(need(params.p, "p", "modp-fanout")?, need(params.n, "n", "modp-fanout")?)?,
        Construction::SubsParity => {
            let set = parse_set(params, "subs-parity")?;
            build_subs_parity(&set, need(params.c, "c", "subs-parity")?)?
        }
        Construction::ToffoliTree => {
            let n = need(params.n, "n", "toffoli-tree")?;
            let eps = parse_epsilon(&params.epsilon)?;
            let seed = params.seed;
            let family = params.family;
            let provider = move |k: usize| match family {
                Family::Singleton => ParityRestrictedSet::singleton(k, (1u64 << k) - 1),
                Family::Random => {
                    let bits = (Rational64::from_integer(k as i64) * (Rational64::from_integer(1) - eps))
                        .floor()
                        .to_integer()
                        .clamp(0, k as i64 - 1) as usize;
                    sampling::random_set(&mut stream_rng(seed, k as u64), k, 1usize << bits, 0)
                }
            };
            build_toffoli_from_small_us(&provider, eps, n)?
        }
    };
    Ok(circuit)
}

pub fn audit_line(c: &Circuit) -> String {
    format!("depth={} size={} qubits={}", c.depth(), c.size(), c.qubit_count())
}

pub fn cmd_build(args: &BuildArgs) -> CmdResult {
    let circuit = construct(args.construction, &args.params)?;
    let json = circuit.to_json()?;
    match &args.output {
        Some(path) => {
            emit(Some(path), &json)?;
            println!("{}", audit_line(&circuit));
        }
        None => {
            eprintln!("{}", audit_line(&circuit));
            emit(None, &json)?;
        }
    }
    Ok(exit_code::PASS)
}
