//! `qpmc`: validate quantum pushdown systems, check formulas on them, and run
//! the PCP encodings end to end.
//!
//! Every command prints one JSON report on stdout and a short summary on
//! stderr. Exit codes: 0 holds/found/pass, 1 fails/none/fail, 2 unknown,
//! 3 input error, 4 checker and oracle disagree.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::RunReport;

#[derive(Debug, Parser)]
#[command(name = "qpmc", version, about = "Exact model checking of quantum pushdown systems")]
struct Cli {
    /// Add decimal approximations next to every exact probability.
    #[arg(long, global = true)]
    approx: bool,

    /// Include wall-clock timing in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,

    /// Ceiling for iterative deepening.
    #[arg(long, global = true, env = "QPMC_MAX_HORIZON", default_value_t = 10_000)]
    max_horizon: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check normalization, totality and rule shape of a system file.
    Validate(ValidateArgs),
    /// Evaluate a formula at a configuration of a system.
    Check(CheckArgs),
    /// Encode a PCP instance as a stateless system plus formula.
    Encode(EncodeArgs),
    /// Solve or decide a PCP instance.
    #[command(subcommand)]
    Pcp(PcpCommand),
    /// Run the per-instance property suite.
    Lemmas(LemmasArgs),
}

#[derive(Debug, Subcommand)]
enum PcpCommand {
    /// Brute-force bounded search for a witness.
    Solve(SolveArgs),
    /// Encode, check and compare against the brute-force solver.
    Decide(DecideArgs),
}

#[derive(Debug, Args)]
struct ValidateArgs {
    system: PathBuf,
    /// Skip the right-hand-side length check.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckMode {
    /// Fixed horizon for bounded formulas, deepening otherwise.
    Auto,
    /// Evaluate once at `--horizon`.
    Fixed,
    /// Double the horizon until the verdict settles or the ceiling is hit.
    Deepen,
}

#[derive(Debug, Args)]
struct CheckArgs {
    system: PathBuf,
    /// Formula text, or a path to a formula file.
    formula: String,
    /// Start configuration, e.g. `Z` or `q0 A B`; defaults to the file's start.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, value_enum, default_value_t = CheckMode::Auto)]
    mode: CheckMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Phases {
    Unit,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    TwoNm,
    Sufficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Decision {
    Sum,
    Literal,
}

#[derive(Debug, Args)]
struct EncodingFlags {
    /// Threshold t in (0,1) used by the acceptance formula.
    #[arg(long, default_value = "1/2")]
    t: String,
    #[arg(long, value_enum, default_value_t = Phases::Unit)]
    phases: Phases,
    /// Seed for `--phases random`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step bound used by the bounded encoding.
    #[arg(long, value_enum, default_value_t = Policy::Sufficient)]
    policy: Policy,
    /// Override the instance's K.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    instance: PathBuf,
    /// Emit the unbounded encoding (unbounded until, no K).
    #[arg(long)]
    unbounded: bool,
    #[command(flatten)]
    flags: EncodingFlags,
    /// Write the system here instead of embedding it in the report.
    #[arg(long)]
    system_out: Option<PathBuf>,
    /// Write the formula file here instead of embedding it in the report.
    #[arg(long)]
    formula_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct DecideArgs {
    instance: PathBuf,
    #[command(flatten)]
    flags: EncodingFlags,
    #[arg(long, value_enum, default_value_t = Decision::Sum)]
    mode: Decision,
}

#[derive(Debug, Args)]
struct LemmasArgs {
    instance: PathBuf,
    /// Seeds for the phase-invariance check.
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3])]
    seeds: Vec<u64>,
    #[arg(long)]
    k: Option<usize>,
}

fn run(cli: Cli) -> ExitCode {
    let start = Instant::now();
    let name = command_name(&cli.command);
    let mut report = match commands::dispatch(&cli) {
        Ok(r) => r,
        Err(e) => RunReport::input_error(name, format!("{e:#}")),
    };
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_millis());
    }
    println!("{}", report.to_json(cli.approx));
    eprint!("{}", commands::summary(&report, cli.approx));
    ExitCode::from(report.verdict.exit_code())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate(_) => "validate",
        Command::Check(_) => "check",
        Command::Encode(_) => "encode",
        Command::Pcp(PcpCommand::Solve(_)) => "pcp solve",
        Command::Pcp(PcpCommand::Decide(_)) => "pcp decide",
        Command::Lemmas(_) => "lemmas",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    // deep formulas and long stacks recurse; give the worker room
    std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || run(cli))
        .expect("spawn worker thread")
        .join()
        .unwrap_or(ExitCode::from(101))
}
