use nekomata::analysis::{verify_grid_bounds, AnalysisMode, NekomataReport, COLUMN_MAX_BITS};
use nekomata::fsets::{sampling, ParityRestrictedSet, SetForm};
use nekomata::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::build::stream_rng;
use crate::cli::{Construction, SweepArgs};
use crate::{exit_code, CmdResult, Failure};

#[derive(Serialize, Default)]
struct Row {
    n: usize,
    set: String,
    m: Option<usize>,
    gamma1: Option<f64>,
    p_one: Option<f64>,
    p_zero: Option<f64>,
    p_bad: Option<f64>,
    fidelity: Option<f64>,
    bound_p1: Option<f64>,
    bound_bad: Option<f64>,
    bound_p0: Option<f64>,
    bound_fidelity: Option<f64>,
    pass: Option<bool>,
    /// `ok`, `skipped` (over the simulation budget) or `invalid`.
    status: String,
}

impl Row {
    fn from_report(set: String, r: &NekomataReport) -> Self {
        Row {
            n: r.n,
            set,
            m: Some(r.m),
            gamma1: Some(r.gamma1),
            p_one: Some(r.p_all_one),
            p_zero: Some(r.p_all_zero),
            p_bad: Some(r.p_bad),
            fidelity: Some(r.fidelity),
            bound_p1: Some(r.bound_p1),
            bound_bad: Some(r.bound_bad),
            bound_p0: Some(r.bound_p0),
            bound_fidelity: Some(r.bound_fidelity),
            pass: Some(r.pass()),
            status: "ok".into(),
        }
    }

    fn empty(n: usize, set: String, status: &str) -> Self {
        Row {
            n,
            set,
            status: status.into(),
            ..Row::default()
        }
    }
}

/// Inclusive `start:end:step`, `start:end`, a comma list, or empty.
fn parse_sizes(text: &str) -> Result<Vec<usize>, Failure> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| Failure::usage(format!("bad size {s:?} in --n {text:?}")));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() > 3 {
            return Err(Failure::usage(format!("--n {text:?} is not start:end:step")));
        }
        let (start, end) = (num(parts[0])?, num(parts[1])?);
        let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
        if step == 0 {
            return Err(Failure::usage("--n step must be positive"));
        }
        return Ok((start..=end).step_by(step).collect());
    }
    text.split(',').map(num).collect()
}

#[derive(Clone, Copy)]
enum SetKind {
    Slice,
    Single,
    Random,
}

fn row(kind: SetKind, n: usize, index: usize, args: &SweepArgs) -> Row {
    let set = match kind {
        SetKind::Slice => ParityRestrictedSet::hamming_slice(n, n / 2),
        SetKind::Single if n <= 64 => ParityRestrictedSet::singleton(n, u64::MAX >> (64 - n.max(1))),
        SetKind::Single => return Row::empty(n, format!("single:1^{n}"), "skipped"),
        SetKind::Random => {
            let label = format!("random:{n}:2^{}", n.saturating_sub(args.deficit));
            if n > COLUMN_MAX_BITS {
                return Row::empty(n, label, "skipped");
            }
            if n < 2 || args.deficit < 1 || args.deficit > n {
                return Row::empty(n, label, "invalid");
            }
            sampling::random_set(&mut stream_rng(args.seed, index as u64), n, 1 << (n - args.deficit), 0)
        }
    };
    let set = match set {
        Ok(s) => s,
        Err(_) => return Row::empty(n, String::new(), "invalid"),
    };
    let label = match kind {
        SetKind::Random => format!("random:{n}:2^{}", n - args.deficit),
        _ => set.to_text(),
    };
    let mode = match set.form() {
        SetForm::HammingSlice { .. } if n % 2 == 0 => AnalysisMode::Symmetric,
        _ => AnalysisMode::Dense,
    };
    match verify_grid_bounds(&set, args.m, mode) {
        Ok(r) => Row::from_report(label, &r),
        Err(Error::BudgetExceeded { .. }) => Row::empty(n, label, "skipped"),
        Err(_) => Row::empty(n, label, "invalid"),
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    if args.construction != Construction::Grid {
        return Err(Failure::usage("sweep supports only the grid construction"));
    }
    let kind = match args.sets.as_str() {
        "slice" => SetKind::Slice,
        "single" => SetKind::Single,
        "random" => SetKind::Random,
        other => return Err(Failure::usage(format!("unknown --sets {other:?}; use slice, single or random"))),
    };
    let sizes = parse_sizes(&args.n)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    let rows: Vec<Row> = pool.install(|| sizes.par_iter().enumerate().map(|(i, &n)| row(kind, n, i, args)).collect());

    let sink: Box<dyn std::io::Write> = match &args.output {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    let header = [
        "n", "set", "m", "gamma1", "p_one", "p_zero", "p_bad", "fidelity", "bound_p1", "bound_bad", "bound_p0",
        "bound_fidelity", "pass", "status",
    ];
    let csv_err = |e: csv::Error| Failure::usage(format!("csv error: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for r in &rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(exit_code::PASS)
}
