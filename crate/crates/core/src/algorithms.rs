//! Gate programs and their execution at gate or pulse level.

use std::fmt;

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::angle::parse_angle;
use crate::error::{Error, Result};
use crate::gates::{conditional_phase, hadamard, r_k_angle, swap, ConditionPattern};
use crate::pulse::{pulse_unitary, sequence_unitary, Axis, Control, PulseSequence, PulseSpec};
use crate::qstate::{
    parse_bitstring, ComplexMatrix, DensityMatrix, QuantumState, StateVector, C64, ZERO,
};
use crate::synth::{expand_composite, synth_hadamard, synth_phase_gate, synth_swap};

/// Label given to the starting state when a program does not name it.
pub const DEFAULT_INITIAL_LABEL: &str = "initial";

/// Execution level of a [`run`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Ideal gate matrices.
    Gate,
    /// Compiled pulse programs.
    Pulse,
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Level> {
        match s {
            "gate" => Ok(Level::Gate),
            "pulse" => Ok(Level::Pulse),
            other => Err(Error::InvalidArgument(format!("unknown level '{other}'"))),
        }
    }
}

/// One gate-level operation.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    H(Vec<usize>),
    Cphase(ConditionPattern, f64),
    Swap(usize, usize),
}

impl Op {
    pub fn gate_matrix(&self, n_qubits: usize) -> Result<ComplexMatrix> {
        match self {
            Op::H(qs) => hadamard(n_qubits, qs),
            Op::Cphase(c, phi) => {
                if c.n_qubits() != n_qubits {
                    return Err(Error::dims(n_qubits, c.n_qubits()));
                }
                Ok(conditional_phase(c, *phi))
            }
            Op::Swap(i, j) => swap(*i, *j, n_qubits),
        }
    }

    /// Pulse program for this step: expanded transition-selective z pulses in
    /// composite form for phase gates, `(π)_x (π/2)_{-y}` pairs for Hadamards
    /// and the π-pulse cascade for SWAP.
    pub fn pulse_program(&self, n_qubits: usize) -> Result<PulseSequence> {
        match self {
            Op::H(qs) => synth_hadamard(qs, n_qubits),
            Op::Cphase(c, phi) => match synth_phase_gate(c, *phi, None, true) {
                Ok(r) => Ok(expand_composite(&r.sequence)),
                Err(Error::NoConditionedQubits) => Err(Error::Unsynthesizable(self.to_string())),
                Err(e) => Err(e),
            },
            Op::Swap(i, j) => synth_swap(*i, *j, n_qubits),
        }
    }

    pub fn unitary(&self, n_qubits: usize, level: Level) -> Result<ComplexMatrix> {
        match level {
            Level::Gate => self.gate_matrix(n_qubits),
            Level::Pulse => sequence_unitary(&self.pulse_program(n_qubits)?),
        }
    }

    fn min_qubits(&self) -> usize {
        match self {
            Op::H(qs) => qs.iter().copied().max().unwrap_or(0),
            Op::Cphase(c, _) => c.n_qubits(),
            Op::Swap(i, j) => *i.max(j),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let check = |q: usize| {
            if q == 0 || q > n {
                Err(Error::InvalidQubit {
                    index: q,
                    n_qubits: n,
                })
            } else {
                Ok(())
            }
        };
        match self {
            Op::H(qs) => {
                if qs.is_empty() {
                    return Err(Error::InvalidArgument("H needs at least one qubit".into()));
                }
                qs.iter().try_for_each(|&q| check(q))
            }
            Op::Cphase(c, _) => {
                if c.n_qubits() != n {
                    return Err(Error::InvalidPattern(format!(
                        "pattern {c} has {} entries for {n} qubits",
                        c.n_qubits()
                    )));
                }
                Ok(())
            }
            Op::Swap(i, j) => {
                check(*i)?;
                check(*j)?;
                if i == j {
                    return Err(Error::InvalidArgument("SWAP needs distinct qubits".into()));
                }
                Ok(())
            }
        }
    }
}

fn join_qubits(qs: &[usize]) -> String {
    qs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Op {
    /// Program-file form of the step.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::H(qs) => write!(f, "H q={}", join_qubits(qs)),
            Op::Cphase(c, phi) => write!(f, "CPHASE pat={c} angle={phi}"),
            Op::Swap(i, j) => write!(f, "SWAP q={i},{j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub op: Op,
    pub checkpoint: Option<String>,
}

/// Ordered gate steps (execution order) with optional checkpoint labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    n_qubits: usize,
    initial_label: String,
    steps: Vec<Step>,
}

impl Program {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument(
                "a program needs at least one qubit".into(),
            ));
        }
        Ok(Program {
            n_qubits,
            initial_label: DEFAULT_INITIAL_LABEL.to_string(),
            steps: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn initial_label(&self) -> &str {
        &self.initial_label
    }

    pub fn push(&mut self, op: Op) -> Result<&mut Self> {
        op.validate(self.n_qubits)?;
        self.steps.push(Step {
            op,
            checkpoint: None,
        });
        Ok(self)
    }

    /// Labels the state after the last step, or the initial state when there are no steps.
    pub fn checkpoint(&mut self, label: &str) -> Result<&mut Self> {
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "bad checkpoint label '{label}'"
            )));
        }
        let taken = self.initial_label == label
            || self
                .steps
                .iter()
                .any(|s| s.checkpoint.as_deref() == Some(label));
        match self.steps.last_mut() {
            None => {
                if self.initial_label != DEFAULT_INITIAL_LABEL {
                    return Err(Error::InvalidArgument(
                        "initial state already labeled".into(),
                    ));
                }
                self.initial_label = label.to_string();
            }
            Some(step) => {
                if taken {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate checkpoint '{label}'"
                    )));
                }
                if step.checkpoint.is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "step '{}' already has a checkpoint",
                        step.op
                    )));
                }
                step.checkpoint = Some(label.to_string());
            }
        }
        Ok(self)
    }

    pub fn labels(&self) -> Vec<&str> {
        std::iter::once(self.initial_label.as_str())
            .chain(self.steps.iter().filter_map(|s| s.checkpoint.as_deref()))
            .collect()
    }

    /// Product of all step unitaries, last step leftmost.
    pub fn unitary(&self, level: Level) -> Result<ComplexMatrix> {
        self.steps
            .iter()
            .try_fold(ComplexMatrix::identity(1 << self.n_qubits), |acc, s| {
                Ok(&s.op.unitary(self.n_qubits, level)? * &acc)
            })
    }

    /// Parses the program text format. `n_qubits` is inferred from the largest
    /// qubit index and pattern length when not given.
    pub fn parse(text: &str, n_qubits: Option<usize>) -> Result<Program> {
        enum Line {
            Op(Op),
            Checkpoint(String),
        }
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed = parse_step_line(line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
            lines.push((i + 1, parsed));
        }
        let inferred = lines
            .iter()
            .filter_map(|(_, l)| match l {
                Line::Op(op) => Some(op.min_qubits()),
                Line::Checkpoint(_) => None,
            })
            .max();
        let n = match (n_qubits, inferred) {
            (Some(n), _) => n,
            (None, Some(n)) => n,
            (None, None) => {
                return Err(Error::InvalidArgument(
                    "program has no steps; qubit count cannot be inferred".into(),
                ))
            }
        };
        let mut program = Program::new(n)?;
        for (lineno, l) in lines {
            let res = match l {
                Line::Op(op) => program.push(op).map(|_| ()),
                Line::Checkpoint(label) => program.checkpoint(&label).map(|_| ()),
            };
            res.map_err(|e| Error::parse(lineno, e.to_string()))?;
        }
        return Ok(program);

        fn parse_step_line(line: &str) -> Result<Line> {
            let mut tokens = line.split_whitespace();
            let keyword = tokens.next().unwrap_or_default().to_ascii_uppercase();
            let args: Vec<&str> = tokens.collect();
            let field = |key: &str| -> Result<&str> {
                args.iter()
                    .find_map(|a| a.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                    .ok_or_else(|| Error::InvalidArgument(format!("missing {key}=")))
            };
            let qubits = || -> Result<Vec<usize>> {
                field("q")?
                    .split(',')
                    .map(|q| {
                        q.parse()
                            .ok()
                            .filter(|&q: &usize| q >= 1)
                            .ok_or_else(|| Error::InvalidArgument(format!("bad qubit '{q}'")))
                    })
                    .collect()
            };
            let expect_args = |k: usize| {
                if args.len() == k {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "{keyword} takes {k} argument(s), got {}",
                        args.len()
                    )))
                }
            };
            match keyword.as_str() {
                "H" => {
                    expect_args(1)?;
                    Ok(Line::Op(Op::H(qubits()?)))
                }
                "CPHASE" => {
                    expect_args(2)?;
                    let c: ConditionPattern = field("pat")?.parse()?;
                    Ok(Line::Op(Op::Cphase(c, parse_angle(field("angle")?)?)))
                }
                "SWAP" => {
                    expect_args(1)?;
                    match qubits()?[..] {
                        [i, j] => Ok(Line::Op(Op::Swap(i, j))),
                        _ => Err(Error::InvalidArgument("SWAP takes q=i,j".into())),
                    }
                }
                "CHECKPOINT" => {
                    expect_args(1)?;
                    Ok(Line::Checkpoint(args[0].to_string()))
                }
                other => Err(Error::InvalidArgument(format!("unknown step '{other}'"))),
            }
        }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if self.initial_label != DEFAULT_INITIAL_LABEL {
            out.push_str(&format!("CHECKPOINT {}\n", self.initial_label));
        }
        for s in &self.steps {
            out.push_str(&format!("{}\n", s.op));
            if let Some(label) = &s.checkpoint {
                out.push_str(&format!("CHECKPOINT {label}\n"));
            }
        }
        out
    }
}

/// States captured at the checkpoints of a run, in execution order.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub level: Level,
    checkpoints: Vec<(String, QuantumState)>,
}

impl RunTrace {
    fn new(level: Level) -> Self {
        RunTrace {
            level,
            checkpoints: Vec::new(),
        }
    }

    fn record(&mut self, label: &str, state: &QuantumState) {
        self.checkpoints.push((label.to_string(), state.clone()));
    }

    pub fn get(&self, label: &str) -> Option<&QuantumState> {
        self.checkpoints
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.checkpoints.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn checkpoints(&self) -> &[(String, QuantumState)] {
        &self.checkpoints
    }

    pub fn last(&self) -> &QuantumState {
        &self
            .checkpoints
            .last()
            .expect("trace holds the initial state")
            .1
    }

    pub fn populations(&self, label: &str) -> Option<Vec<f64>> {
        self.get(label).map(QuantumState::populations)
    }

    pub fn is_density(&self) -> bool {
        matches!(self.last(), QuantumState::Mixed(_))
    }
}

impl Serialize for RunTrace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.checkpoints.len()))?;
        for (label, state) in &self.checkpoints {
            map.serialize_entry(label, &state.to_json())?;
        }
        map.end()
    }
}

/// Executes `program` from `initial`, capturing every labeled checkpoint.
pub fn run(program: &Program, initial: &QuantumState, level: Level) -> Result<RunTrace> {
    let n = program.n_qubits();
    if initial.n_qubits() != n {
        return Err(Error::dims(
            format!("{n}-qubit state"),
            format!("{}-qubit state", initial.n_qubits()),
        ));
    }
    let mut trace = RunTrace::new(level);
    trace.record(program.initial_label(), initial);
    let mut state = initial.clone();
    for step in program.steps() {
        state = state.evolve(&step.op.unitary(n, level)?)?;
        if let Some(label) = &step.checkpoint {
            trace.record(label, &state);
        }
    }
    Ok(trace)
}

fn parse_bits(bits: &str, n_qubits: usize, what: &str) -> Result<Vec<bool>> {
    if bits.len() != n_qubits {
        return Err(Error::InvalidArgument(format!(
            "{what} '{bits}' has {} bits for {n_qubits} qubits",
            bits.len()
        )));
    }
    parse_bitstring(bits)?;
    Ok(bits.chars().map(|c| c == '1').collect())
}

/// Grover search from `|0...0>`; see [`grover_program_from`].
pub fn grover_program(n_qubits: usize, target: &str, iterations: usize) -> Result<Program> {
    grover_program_from(n_qubits, target, iterations, &"0".repeat(n_qubits))
}

/// Grover search for `target` starting from the basis state `start`.
///
/// `H`, then per iteration `[C_target(π); H; C_start(π); H]`. Checkpoints:
/// `pseudo_pure` (start), `superposition`, then `sign_flip_k` and
/// `inversion_k` for each iteration `k`.
pub fn grover_program_from(
    n_qubits: usize,
    target: &str,
    iterations: usize,
    start: &str,
) -> Result<Program> {
    if iterations == 0 {
        return Err(Error::InvalidArgument(
            "Grover needs at least one iteration".into(),
        ));
    }
    let target = ConditionPattern::from_bits(&parse_bits(target, n_qubits, "target")?)?;
    let start = ConditionPattern::from_bits(&parse_bits(start, n_qubits, "start state")?)?;
    let all: Vec<usize> = (1..=n_qubits).collect();
    let pi = std::f64::consts::PI;
    let mut p = Program::new(n_qubits)?;
    p.checkpoint("pseudo_pure")?;
    p.push(Op::H(all.clone()))?.checkpoint("superposition")?;
    for k in 1..=iterations {
        p.push(Op::Cphase(target.clone(), pi))?
            .checkpoint(&format!("sign_flip_{k}"))?;
        p.push(Op::H(all.clone()))?;
        p.push(Op::Cphase(start.clone(), pi))?;
        p.push(Op::H(all.clone()))?
            .checkpoint(&format!("inversion_{k}"))?;
    }
    Ok(p)
}

/// QFT circuit on `n` qubits (qubit 1 most significant).
///
/// For `k = 1..n`: the phase gates `C(2π/2^{k-j+1})` conditioned on qubits
/// `j < k` and `k` both being 1, then `H_k`; finally the qubit-reversal SWAPs.
/// For `n = 3` this is `H1, C_{11ε}(π/2), H2, C_{1ε1}(π/4), C_{ε11}(π/2), H3, SWAP13`.
/// Checkpoint labels are `h{k}`, `c{j}_{k}`, `swap{i}_{j}`, with the last step
/// labeled `output`.
pub fn qft_program(n: usize) -> Result<Program> {
    let mut ops = Vec::new();
    for k in 1..=n {
        for j in 1..k {
            let mut pat = vec![Control::Any; n];
            pat[j - 1] = Control::One;
            pat[k - 1] = Control::One;
            let angle = r_k_angle((k - j + 1) as u32);
            ops.push((
                Op::Cphase(ConditionPattern::new(pat)?, angle),
                format!("c{j}_{k}"),
            ));
        }
        ops.push((Op::H(vec![k]), format!("h{k}")));
    }
    for i in 1..=n / 2 {
        ops.push((Op::Swap(i, n + 1 - i), format!("swap{i}_{}", n + 1 - i)));
    }
    let mut p = Program::new(n)?;
    p.checkpoint("input")?;
    let last = ops.len() - 1;
    for (idx, (op, label)) in ops.into_iter().enumerate() {
        p.push(op)?;
        p.checkpoint(if idx == last { "output" } else { &label })?;
    }
    Ok(p)
}

/// Basis-state input of period `period` over `2^n` indices: spin-selective
/// `(π/2)_y` on qubits `1..=n - log2(period)` applied to `|0...0>`.
pub fn periodic_input(n: usize, period: usize) -> Result<StateVector> {
    let q = 1usize << n;
    if !period.is_power_of_two() || period > q {
        return Err(Error::InvalidArgument(format!(
            "period {period} must be a power of two no larger than {q}"
        )));
    }
    let rotated = n - period.trailing_zeros() as usize;
    let mut u = ComplexMatrix::identity(q);
    for qubit in 1..=rotated {
        u = &pulse_unitary(&PulseSpec::spin_selective(
            Axis::Y,
            std::f64::consts::FRAC_PI_2,
            qubit,
            n,
        )?) * &u;
    }
    crate::qstate::apply(&u, &StateVector::basis(n, 0)?)
}

/// Transition-selective pseudo-pure preparation on two qubits.
///
/// Starts from the deviation `diag(1, 0, 0, -1)`, applies `(arccos(1/3))_x`
/// on qubit 1 between `|01>` and `|11>`, `(π/2)_x` on qubit 2 between `|10>`
/// and `|11>`, then crushes coherences. Final populations are
/// `(1, -1/3, -1/3, -1/3)`.
pub fn pseudo_pure_2q() -> Result<(DensityMatrix, RunTrace)> {
    let thermal = DensityMatrix::deviation(ComplexMatrix::from_diagonal(&[
        C64::new(1.0, 0.0),
        ZERO,
        ZERO,
        C64::new(-1.0, 0.0),
    ]))?;
    let pulses = pseudo_pure_pulses()?;
    let [equalize, mix] = pulses.pulses() else {
        unreachable!("two preparation pulses")
    };
    let mut trace = RunTrace::new(Level::Pulse);
    let mut rho = thermal;
    trace.record("thermal", &QuantumState::Mixed(rho.clone()));
    rho = rho.conjugate(&pulse_unitary(equalize))?;
    trace.record("x_q1_given_q2_1", &QuantumState::Mixed(rho.clone()));
    rho = rho.conjugate(&pulse_unitary(mix))?;
    trace.record("x_q2_given_q1_1", &QuantumState::Mixed(rho.clone()));
    rho = rho.crush();
    trace.record("crushed", &QuantumState::Mixed(rho.clone()));
    Ok((rho, trace))
}

/// `[(arccos(1/3))_{x, q2=1} (π/2)_{x, q1=1}]`, the pulses of [`pseudo_pure_2q`].
pub fn pseudo_pure_pulses() -> Result<PulseSequence> {
    PulseSequence::new(vec![
        PulseSpec::new(
            Axis::X,
            (1.0f64 / 3.0).acos(),
            1,
            vec![Control::Any, Control::One],
        )?,
        PulseSpec::new(
            Axis::X,
            std::f64::consts::FRAC_PI_2,
            2,
            vec![Control::One, Control::Any],
        )?,
    ])
}

/// Index and value of the largest population (first on ties).
pub fn argmax(populations: &[f64]) -> Option<(usize, f64)> {
    populations
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((i, p)),
        })
}
