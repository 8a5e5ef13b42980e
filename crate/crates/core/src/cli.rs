//! The `nmrqip` command-line front end.
//!
//! [`run_cli`] takes its argument list and output streams explicitly so the
//! whole tool can be driven from tests. Exit codes: 0 on success, 1 when a
//! verification fails, 2 for usage, parse and I/O errors.
//!
//! Primary output (pulse programs, JSON) goes to `--out` or stdout. Short
//! summaries go to stdout unless stdout already carries the primary output,
//! in which case they move to stderr. Charts always go to stderr.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algorithms::{
    argmax, grover_program_from, periodic_input, pseudo_pure_2q, qft_program, run, Level, Program,
    RunTrace,
};
use crate::angle::parse_angle;
use crate::error::Error;
use crate::gates::{ConditionPattern, Gate};
use crate::json;
use crate::pulse::{parse_program, serialize_program};
use crate::qstate::{
    format_bits, DensityMatrix, MatrixJson, QuantumState, StateVector, DEFAULT_TOL,
};
use crate::synth::{expand_composite, synth_phase_gate, verify_sequence, verify_up_to_diagonal};

const CHART_WIDTH: usize = 40;

type CliResult = std::result::Result<i32, Box<dyn std::error::Error>>;

#[derive(Debug, Parser)]
#[command(
    name = "nmrqip",
    version,
    about = "Compile conditional phase gates to NMR pulse programs and simulate small algorithms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a conditional phase gate into a pulse program.
    Synth(SynthArgs),
    /// Run Grover search and report the most probable basis state.
    Grover(GroverArgs),
    /// Run the quantum Fourier transform on a periodic input.
    Qft(QftArgs),
    /// Prepare the two-qubit pseudo-pure state from thermal equilibrium.
    Ppure(OutputArgs),
    /// Check a pulse program file against a target gate.
    Verify(VerifyArgs),
    /// Execute a gate program file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the primary output to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Emit the checkpoint trace as JSON.
    #[arg(long)]
    json: bool,
    /// Draw population bar charts on stderr.
    #[arg(long)]
    chart: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Condition pattern over 0, 1 and e (for example 110 or 1e1).
    #[arg(long)]
    pattern: ConditionPattern,
    /// Phase angle: pi, pi/2, 3pi/4, -pi/8 or decimal radians.
    #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
    angle: f64,
    /// Conditioned qubits in rotation order, comma separated.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    /// Emit one transition-selective pulse per spectator state.
    #[arg(long)]
    expand: bool,
    /// Replace every z pulse by its x/y composite.
    #[arg(long)]
    composite: bool,
    /// Check the program against the gate matrix and print the report.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GroverArgs {
    #[arg(short = 'n', long = "qubits", default_value_t = 3)]
    n: usize,
    /// Marked basis state, e.g. 110.
    #[arg(long)]
    target: String,
    /// Number of iterations; defaults to floor(pi/4 * sqrt(2^n)).
    #[arg(long)]
    iters: Option<usize>,
    /// Starting basis state; the inversion step is built around it.
    #[arg(long)]
    start: Option<String>,
    #[arg(long, default_value = "gate")]
    level: Level,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct QftArgs {
    #[arg(short = 'n', long = "qubits", default_value_t = 3)]
    n: usize,
    /// Period of the input superposition; defaults to 2^n (the state |0...0>).
    #[arg(long)]
    input_period: Option<usize>,
    #[arg(long, default_value = "gate")]
    level: Level,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Equivalence {
    /// Equal up to one overall phase.
    Global,
    /// Equal up to a diagonal unitary (populations agree).
    Diagonal,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Pulse program file.
    file: PathBuf,
    /// Target gate, e.g. Cphase(111,pi), H(1,2), QFT(3), SWAP(1,3), Rk(2).
    #[arg(long)]
    target: Gate,
    /// Required global phase of the program relative to the target.
    #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
    expected_phase: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Equivalence::Global)]
    up_to: Equivalence,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Gate program file.
    file: PathBuf,
    /// Qubit count; inferred from the program when omitted.
    #[arg(short = 'n', long = "qubits")]
    n: Option<usize>,
    #[arg(long, default_value = "gate")]
    level: Level,
    /// Initial basis state as a bit string; defaults to all zeros.
    #[arg(long, conflicts_with = "initial_json")]
    initial: Option<String>,
    /// Initial state or density matrix as a JSON file.
    #[arg(long, value_name = "FILE")]
    initial_json: Option<PathBuf>,
    /// Evolve the density matrix of the initial state.
    #[arg(long)]
    density: bool,
    #[command(flatten)]
    output: OutputArgs,
}

fn angle_arg(s: &str) -> std::result::Result<f64, Error> {
    parse_angle(s)
}

/// Runs the tool with `args` (including the program name) and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                2
            } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
            return code;
        }
    };
    let mut io = Streams { stdout, stderr };
    let outcome = match cli.command {
        Command::Synth(a) => cmd_synth(a, &mut io),
        Command::Grover(a) => cmd_grover(a, &mut io),
        Command::Qft(a) => cmd_qft(a, &mut io),
        Command::Ppure(a) => cmd_ppure(a, &mut io),
        Command::Verify(a) => cmd_verify(a, &mut io),
        Command::Run(a) => cmd_run(a, &mut io),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            2
        }
    }
}

struct Streams<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Streams<'_> {
    /// Writes the primary output and returns the stream for summaries.
    fn emit(&mut self, text: &str, out: Option<&Path>) -> std::io::Result<&mut dyn Write> {
        match out {
            Some(path) => {
                fs::write(path, text)?;
                Ok(&mut *self.stdout)
            }
            None => {
                self.stdout.write_all(text.as_bytes())?;
                Ok(&mut *self.stderr)
            }
        }
    }
}

fn cmd_synth(a: SynthArgs, io: &mut Streams) -> CliResult {
    let r = synth_phase_gate(&a.pattern, a.angle, a.order.as_deref(), a.expand)?;
    let seq = if a.composite {
        expand_composite(&r.sequence)
    } else {
        r.sequence
    };
    let summary = io.emit(&serialize_program(&seq), a.out.as_deref())?;
    if !a.verify {
        return Ok(0);
    }
    let target = crate::gates::conditional_phase(&a.pattern, a.angle);
    let report = verify_sequence(&seq, &target, Some(r.expected_phase), a.tol)?
        .labeled(Gate::Cphase(a.pattern, a.angle).to_string());
    writeln!(summary, "{}", json::to_string(&report)?)?;
    Ok(if report.pass { 0 } else { 1 })
}

fn cmd_grover(a: GroverArgs, io: &mut Streams) -> CliResult {
    let iters = a.iters.unwrap_or_else(|| default_iterations(a.n));
    let start = a.start.unwrap_or_else(|| "0".repeat(a.n));
    let program = grover_program_from(a.n, &a.target, iters, &start)?;
    let initial = QuantumState::Pure(StateVector::from_bits(&start)?);
    let trace = run(&program, &initial, a.level)?;
    let pops = trace.last().populations();
    let (best, p) = argmax(&pops).expect("populations are nonempty");
    let line = format!(
        "most probable: |{}> probability {p:.5}",
        format_bits(best, a.n)
    );
    finish_trace(&trace, &a.output, &line, io)
}

fn default_iterations(n: usize) -> usize {
    let root = ((1u64 << n.min(62)) as f64).sqrt();
    ((std::f64::consts::FRAC_PI_4 * root).floor() as usize).max(1)
}

fn cmd_qft(a: QftArgs, io: &mut Streams) -> CliResult {
    let period = a.input_period.unwrap_or(1 << a.n.min(62));
    let input = periodic_input(a.n, period)?;
    let trace = run(&qft_program(a.n)?, &QuantumState::Pure(input), a.level)?;
    let line = format!(
        "output populations: {}",
        format_populations(&trace.last().populations())
    );
    finish_trace(&trace, &a.output, &line, io)
}

fn cmd_ppure(a: OutputArgs, io: &mut Streams) -> CliResult {
    let (rho, trace) = pseudo_pure_2q()?;
    let line = format!(
        "deviation populations: {}",
        format_populations(&rho.populations())
    );
    finish_trace(&trace, &a, &line, io)
}

fn cmd_run(a: RunArgs, io: &mut Streams) -> CliResult {
    let text = fs::read_to_string(&a.file)?;
    let program = Program::parse(&text, a.n)?;
    let n = program.n_qubits();
    let mut initial = match (&a.initial, &a.initial_json) {
        (_, Some(path)) => {
            serde_json::from_str::<MatrixJson>(&fs::read_to_string(path)?)?.to_state()?
        }
        (Some(bits), None) => QuantumState::Pure(StateVector::from_bits(bits)?),
        (None, None) => QuantumState::Pure(StateVector::basis(n, 0)?),
    };
    if a.density {
        if let QuantumState::Pure(s) = &initial {
            initial = QuantumState::Mixed(DensityMatrix::from_pure(s));
        }
    }
    let trace = run(&program, &initial, a.level)?;
    let mut summary = String::new();
    for (label, state) in trace.checkpoints() {
        let _ = writeln!(
            summary,
            "{label}: {}",
            format_populations(&state.populations())
        );
    }
    finish_trace(&trace, &a.output, summary.trim_end(), io)
}

fn cmd_verify(a: VerifyArgs, io: &mut Streams) -> CliResult {
    let text = fs::read_to_string(&a.file)?;
    let seq = parse_program(&text)?;
    let n = seq.n_qubits().ok_or(Error::EmptySequence)?;
    let target = a.target.matrix(n)?;
    let report = match a.up_to {
        Equivalence::Global => verify_sequence(&seq, &target, a.expected_phase, a.tol)?,
        Equivalence::Diagonal => verify_up_to_diagonal(&seq, &target, a.tol)?,
    }
    .labeled(a.target.to_string());
    io.emit(
        &format!("{}\n", json::to_string(&report)?),
        a.out.as_deref(),
    )?;
    Ok(if report.pass { 0 } else { 1 })
}

/// Writes the trace JSON (when requested), the summary line and any charts.
fn finish_trace(trace: &RunTrace, opts: &OutputArgs, summary: &str, io: &mut Streams) -> CliResult {
    let sink: &mut dyn Write = if opts.json || opts.out.is_some() {
        io.emit(
            &format!("{}\n", json::to_string(trace)?),
            opts.out.as_deref(),
        )?
    } else {
        &mut *io.stdout
    };
    writeln!(sink, "{summary}")?;
    if opts.chart {
        for (label, state) in trace.checkpoints() {
            write!(io.stderr, "{}", chart(label, &state.populations()))?;
        }
    }
    Ok(0)
}

fn format_populations(pops: &[f64]) -> String {
    pops.iter()
        .map(|p| format!("{:.5}", p + 0.0))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Horizontal bar chart of `pops`, scaled so the largest magnitude fills
/// the full width. Negative values are drawn with `-`.
pub fn chart(label: &str, pops: &[f64]) -> String {
    let n = crate::qstate::qubits_for_dim(pops.len()).unwrap_or(0);
    let scale = pops.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let mut out = format!("[{label}]\n");
    for (i, &p) in pops.iter().enumerate() {
        let len = if scale > 0.0 {
            (p.abs() / scale * CHART_WIDTH as f64).round() as usize
        } else {
            0
        };
        let bar = if p < 0.0 { "-" } else { "#" }.repeat(len);
        let _ = writeln!(
            out,
            "|{}> {bar:<width$} {:>8.5}",
            format_bits(i, n),
            p + 0.0,
            width = CHART_WIDTH
        );
    }
    out
}
