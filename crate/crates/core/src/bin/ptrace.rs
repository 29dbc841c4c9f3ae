//! `ptrace`: partial traces of qubit state files.
//!
//! Exit codes: 0 success, 1 verification disagreement, 2 invalid arguments,
//! 3 file errors, 4 validation failure under `--strict`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use powerset_ptrace::bench::{run_bench, BenchConfig, BenchReport, BenchState, MethodChoice};
use powerset_ptrace::io::{self, FileFormat};
use powerset_ptrace::verify::{run_verify, VerifyConfig};
use powerset_ptrace::{trace_with, Error, State, Tolerances, TraceSpec};

const EXIT_DISAGREEMENT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_FILE: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ptrace", version, about = "Partial traces of multi-qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace qubits out of a state file and write the reduced density matrix.
    Trace(TraceArgs),
    /// Cross-check every method on seeded random states.
    Verify(VerifyArgs),
    /// Time a method on a generated state.
    Bench(BenchArgs),
}

fn parse_format(s: &str) -> Result<FileFormat, String> {
    match s {
        "text" => Ok(FileFormat::Text),
        "binary" => Ok(FileFormat::Binary),
        other => Err(format!("unknown format '{other}' (text|binary)")),
    }
}

#[derive(Args, Debug)]
struct TraceArgs {
    /// Input state file (text or binary).
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated 1-based positions to trace out; position 1 is the
    /// rightmost qubit of a ket.
    #[arg(long, default_value = "")]
    trace: String,
    #[arg(long, default_value = "auto", value_parser = MethodChoice::from_str)]
    method: MethodChoice,
    /// Output path, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: FileFormat,
    /// Normalization tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Fail (exit 4) instead of warning when the input is not normalized.
    #[arg(long)]
    strict: bool,
    /// Print the full trace of the input instead of a reduced matrix.
    #[arg(long)]
    scalar: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed positions instead of a random spec per trial.
    #[arg(long)]
    positions: Option<String>,
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    n: usize,
    /// Trace positions 1..=M.
    #[arg(long, conflicts_with = "positions")]
    trace_count: Option<usize>,
    #[arg(long)]
    positions: Option<String>,
    #[arg(long, default_value = "auto", value_parser = MethodChoice::from_str)]
    method: MethodChoice,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value = "random", value_parser = BenchState::from_str)]
    state: BenchState,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Build the density matrix even for the power-set kernel.
    #[arg(long)]
    mixed: bool,
    /// Allow mixed-state benches above 14 qubits.
    #[arg(long)]
    force: bool,
    /// Compute output rows on all cores.
    #[arg(long)]
    parallel: bool,
    /// One JSON object per rep instead of tab-separated lines.
    #[arg(long)]
    json_lines: bool,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("ptrace: {msg}");
    ExitCode::from(code)
}

fn run_trace(args: TraceArgs) -> ExitCode {
    let positions = match io::parse_positions(&args.trace) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if !(args.tol.is_finite() && args.tol >= 0.0) {
        return fail(EXIT_USAGE, "--tol must be a non-negative number");
    }
    let state = match io::parse_state_file(&args.input) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_FILE, format!("{}: {e}", args.input.display())),
    };
    if let Err(e) = io::check_normalization(&state, &Tolerances::uniform(args.tol)) {
        if args.strict {
            return fail(EXIT_VALIDATION, e);
        }
        eprintln!("ptrace: warning: {e}");
    }
    let n = state.n_qubits().unwrap_or(0);

    if args.scalar {
        let total = match &state {
            State::Pure(psi) => num_complex::Complex64::new(psi.norm_sqr(), 0.0),
            State::Mixed(rho) => powerset_ptrace::full_trace(rho),
        };
        println!("{:.16e} {:.16e}", total.re, total.im);
        return ExitCode::SUCCESS;
    }

    let spec = match TraceSpec::for_qubits(n, &positions) {
        Ok(s) => s,
        Err(Error::FullTraceNotASpec { .. }) => {
            return fail(
                EXIT_USAGE,
                "tracing every qubit leaves a scalar; rerun with `ptrace trace --scalar` to print the total trace",
            )
        }
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let method = args.method.resolve(matches!(state, State::Pure(_)));
    let reduced = match trace_with(method, state.as_ref(), &spec) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let bytes = io::serialize(&State::Mixed(reduced.matrix), args.format);
    let written = if args.out == "-" {
        std::io::stdout().lock().write_all(&bytes)
    } else {
        std::fs::write(&args.out, &bytes)
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_FILE, format!("{}: {e}", args.out)),
    }
}

fn run_verify_cmd(args: VerifyArgs) -> ExitCode {
    let positions = match args.positions.as_deref().map(io::parse_positions).transpose() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let config = VerifyConfig {
        n_qubits: args.n,
        trials: args.trials,
        seed: args.seed,
        positions,
        verbose: args.verbose,
    };
    let report = match run_verify(&config) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    for line in &report.lines {
        println!("{line}");
    }
    println!(
        "{} comparisons over {} trials, max disagreement {:.3e}",
        report.comparisons, args.trials, report.max_disagreement
    );
    if report.passed() {
        println!("PASS");
        ExitCode::SUCCESS
    } else {
        if let Some(worst) = &report.worst {
            println!("FAIL: {worst}");
        }
        ExitCode::from(EXIT_DISAGREEMENT)
    }
}

fn run_bench_cmd(args: BenchArgs) -> ExitCode {
    let positions = match (&args.positions, args.trace_count) {
        (Some(p), _) => match io::parse_positions(p) {
            Ok(p) => p,
            Err(e) => return fail(EXIT_USAGE, e),
        },
        (None, Some(m)) => (1..=m).collect(),
        (None, None) => return fail(EXIT_USAGE, "one of --trace-count or --positions is required"),
    };
    let config = BenchConfig {
        n_qubits: args.n,
        positions,
        method: args.method,
        reps: args.reps,
        state: args.state,
        seed: args.seed,
        mixed: args.mixed,
        force: args.force,
        parallel: args.parallel,
    };
    let reports = match run_bench(&config) {
        Ok(r) => r,
        Err(Error::CostGuardExceeded { n, max }) => {
            return fail(EXIT_USAGE, format!("mixed-state bench with {n} > {max} qubits needs --force"))
        }
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let mut out = std::io::stdout().lock();
    if !args.json_lines {
        let _ = writeln!(out, "{}", BenchReport::TSV_HEADER);
    }
    for r in &reports {
        let line = if args.json_lines { r.to_json() } else { r.to_tsv() };
        let _ = writeln!(out, "{line}");
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match cli.command {
        Command::Trace(args) => run_trace(args),
        Command::Verify(args) => run_verify_cmd(args),
        Command::Bench(args) => run_bench_cmd(args),
    }
}
