use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "neko", version, about = "Build, simulate, verify and sweep nekomata circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a circuit and write it as JSON.
    Build(BuildArgs),
    /// Simulate a serialized circuit from a basis input.
    Run(RunArgs),
    /// Run a verification suite; exit 0 iff every check passes.
    Verify(VerifyArgs),
    /// Evaluate the grid analyzer over a range of sizes, one CSV row each.
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Grid,
    Fig2Parity,
    CatParity,
    ModpFanout,
    SubsParity,
    ToffoliTree,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Direct,
    ThresholdCompiled,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preparer {
    Cat,
    Grid,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Catlike {
    Fanout,
    Modp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Seeded random even-weight sets of size `2^floor((1 - eps) k)`.
    Random,
    /// The singleton `{1^k}`.
    Singleton,
}

/// Parameters shared by every construction.
#[derive(Args, Debug, Clone)]
pub struct Params {
    /// Input size (or word length for sets given by size).
    #[arg(long)]
    pub n: Option<usize>,
    /// Parity-restricted set: `slice:n:w`, `single:bits`, or a comma list.
    #[arg(long)]
    pub set: Option<String>,
    /// Non-target grid columns (default: computed from gamma1).
    #[arg(long)]
    pub m: Option<usize>,
    /// How grid reflections realize `U_S`.
    #[arg(long = "us-mode", value_enum, default_value = "direct")]
    pub us_mode: Mode,
    #[arg(long)]
    pub p: Option<usize>,
    /// Covering constant for subs-parity.
    #[arg(long)]
    pub c: Option<usize>,
    /// Rational epsilon for toffoli-tree, e.g. `1/2`.
    #[arg(long, default_value = "1/2")]
    pub epsilon: String,
    #[arg(long, value_enum, default_value = "cat")]
    pub preparer: Preparer,
    #[arg(long, value_enum, default_value = "fanout")]
    pub catlike: Catlike,
    #[arg(long, value_enum, default_value = "random")]
    pub family: Family,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(value_enum)]
    pub construction: Construction,
    #[command(flatten)]
    pub params: Params,
    /// Output file (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Circuit JSON written by `build`.
    pub circuit: PathBuf,
    /// Basis input over all wires (default all zeros).
    #[arg(long)]
    pub input: Option<String>,
    /// Number of most likely outcomes to report.
    #[arg(long, default_value_t = 8)]
    pub top: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    GridBounds,
    Fig2,
    Modp,
    Moda,
    Subs,
    Restrict,
    Equivalences,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalysisModeArg {
    Dense,
    Symmetric,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub params: Params,
    /// Analyzer for grid-bounds.
    #[arg(long = "mode", alias = "analysis", value_enum, default_value = "symmetric")]
    pub analysis: AnalysisModeArg,
    /// Trials for randomized suites.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub construction: Construction,
    /// Sizes as `start:end:step` (inclusive) or a comma list; empty for none.
    #[arg(long, default_value = "")]
    pub n: String,
    /// Set per size: `slice` (weight n/2), `single` (`1^n`) or `random`.
    #[arg(long, default_value = "slice")]
    pub sets: String,
    /// Size of random sets as a fraction exponent: `|S| = 2^(n - k)`.
    #[arg(long, default_value_t = 4)]
    pub deficit: usize,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
