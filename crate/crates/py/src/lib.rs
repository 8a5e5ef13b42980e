//! Python bindings for `nmrqip-core`.
//!
//! Matrices cross the boundary as lists of rows of Python `complex`; angles
//! may be given as floats or as strings such as `"pi/2"`.

use nmrqip_core::algorithms::{self, Level, Program, RunTrace};
use nmrqip_core::angle::parse_angle;
use nmrqip_core::gates::{self, ConditionPattern, Gate};
use nmrqip_core::pulse::{parse_program, sequence_unitary, serialize_program, PulseSequence};
use nmrqip_core::qstate::{self, ComplexMatrix, DensityMatrix, QuantumState, StateVector, C64};
use nmrqip_core::synth;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

type Rows = Vec<Vec<C64>>;

fn err(e: nmrqip_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[derive(FromPyObject)]
enum Angle {
    Radians(f64),
    Text(String),
}

impl Angle {
    fn value(&self) -> PyResult<f64> {
        match self {
            Angle::Radians(x) => Ok(*x),
            Angle::Text(s) => parse_angle(s).map_err(err),
        }
    }
}

fn rows(m: &ComplexMatrix) -> Rows {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

fn level(name: &str) -> PyResult<Level> {
    name.parse().map_err(err)
}

fn pattern(text: &str) -> PyResult<ConditionPattern> {
    text.parse().map_err(err)
}

/// A pulse program in time order.
#[pyclass(name = "PulseProgram", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPulseProgram(PulseSequence);

#[pymethods]
impl PyPulseProgram {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        parse_program(text).map(Self).map_err(err)
    }

    fn to_text(&self) -> String {
        serialize_program(&self.0)
    }

    #[getter]
    fn n_qubits(&self) -> Option<usize> {
        self.0.n_qubits()
    }

    #[getter]
    fn z_count(&self) -> usize {
        self.0.z_count()
    }

    /// Product of all pulse unitaries, latest pulse leftmost.
    fn unitary(&self) -> PyResult<Rows> {
        sequence_unitary(&self.0).map(|u| rows(&u)).map_err(err)
    }

    /// The same program with each z pulse replaced by its x/y composite.
    fn composite(&self) -> Self {
        Self(synth::expand_composite(&self.0))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("PulseProgram({} pulses)", self.0.len())
    }
}

/// Output of `synth_phase_gate`.
#[pyclass(name = "Synthesis", frozen, get_all)]
struct PySynthesis {
    program: PyPulseProgram,
    expected_phase: f64,
    z_pulse_count: usize,
    expanded: bool,
}

/// Compiles `C_pattern(angle)` into z pulses (optionally composite x/y pulses).
#[pyfunction]
#[pyo3(signature = (pattern, angle, order=None, expanded=false, composite=false))]
fn synth_phase_gate(
    pattern: &str,
    angle: Angle,
    order: Option<Vec<usize>>,
    expanded: bool,
    composite: bool,
) -> PyResult<PySynthesis> {
    let c = self::pattern(pattern)?;
    let r = synth::synth_phase_gate(&c, angle.value()?, order.as_deref(), expanded).map_err(err)?;
    let sequence = if composite {
        synth::expand_composite(&r.sequence)
    } else {
        r.sequence
    };
    Ok(PySynthesis {
        program: PyPulseProgram(sequence),
        expected_phase: r.expected_phase,
        z_pulse_count: r.z_pulse_count,
        expanded: r.expanded,
    })
}

#[pyclass(name = "VerificationReport", frozen, get_all)]
struct PyReport {
    target: String,
    max_err: f64,
    phase: f64,
    passed: bool,
    diagonal_phases: Option<Vec<f64>>,
}

#[pymethods]
impl PyReport {
    fn __bool__(&self) -> bool {
        self.passed
    }

    fn __repr__(&self) -> String {
        format!(
            "VerificationReport(target={:?}, passed={}, max_err={:e}, phase={})",
            self.target, self.passed, self.max_err, self.phase
        )
    }
}

/// Checks a pulse program against a named gate such as `"Cphase(111,pi)"`.
///
/// `up_to` is `"global"` (one overall phase) or `"diagonal"` (any diagonal
/// unitary, so populations agree).
#[pyfunction]
#[pyo3(signature = (program, target, expected_phase=None, tol=1e-12, up_to="global"))]
fn verify(
    program: &PyPulseProgram,
    target: &str,
    expected_phase: Option<Angle>,
    tol: f64,
    up_to: &str,
) -> PyResult<PyReport> {
    let gate: Gate = target.parse().map_err(err)?;
    let n = program
        .0
        .n_qubits()
        .ok_or_else(|| err(nmrqip_core::Error::EmptySequence))?;
    let matrix = gate.matrix(n).map_err(err)?;
    let expected = expected_phase.map(|a| a.value()).transpose()?;
    let report = match up_to {
        "global" => synth::verify_sequence(&program.0, &matrix, expected, tol),
        "diagonal" => synth::verify_up_to_diagonal(&program.0, &matrix, tol),
        other => {
            return Err(PyValueError::new_err(format!(
                "up_to must be 'global' or 'diagonal', got {other:?}"
            )))
        }
    }
    .map_err(err)?;
    Ok(PyReport {
        target: gate.to_string(),
        max_err: report.max_err,
        phase: report.phase,
        passed: report.pass,
        diagonal_phases: report.diagonal_phases,
    })
}

/// Matrix of a named gate on `n_qubits` (defaults to the gate's own size).
#[pyfunction]
#[pyo3(signature = (name, n_qubits=None))]
fn gate_matrix(name: &str, n_qubits: Option<usize>) -> PyResult<Rows> {
    let gate: Gate = name.parse().map_err(err)?;
    let n = n_qubits
        .or_else(|| gate.natural_qubits())
        .ok_or_else(|| PyValueError::new_err(format!("{gate} needs an explicit qubit count")))?;
    gate.matrix(n).map(|m| rows(&m)).map_err(err)
}

#[pyfunction]
fn conditional_phase(pattern: &str, angle: Angle) -> PyResult<Rows> {
    Ok(rows(&gates::conditional_phase(
        &self::pattern(pattern)?,
        angle.value()?,
    )))
}

#[pyfunction]
fn qft_matrix(n: usize) -> PyResult<Rows> {
    gates::qft_matrix(n).map(|m| rows(&m)).map_err(err)
}

/// Returns `(equal, phase, max_err)` for `a = e^{i phase} b`.
#[pyfunction]
#[pyo3(signature = (a, b, tol=1e-12))]
fn equal_up_to_global_phase(a: Rows, b: Rows, tol: f64) -> PyResult<(bool, f64, f64)> {
    let a = ComplexMatrix::from_rows(a).map_err(err)?;
    let b = ComplexMatrix::from_rows(b).map_err(err)?;
    let m = qstate::equal_up_to_global_phase(&a, &b, tol).map_err(err)?;
    Ok((m.equal, m.phase, m.max_err))
}

/// States recorded at the labeled checkpoints of a run.
#[pyclass(name = "Trace", frozen)]
struct PyTrace(RunTrace);

impl PyTrace {
    fn state(&self, label: &str) -> PyResult<&QuantumState> {
        self.0
            .get(label)
            .ok_or_else(|| PyValueError::new_err(format!("no checkpoint named {label:?}")))
    }
}

#[pymethods]
impl PyTrace {
    fn labels(&self) -> Vec<String> {
        self.0.labels().into_iter().map(String::from).collect()
    }

    /// Basis-state populations at a checkpoint (the last one by default).
    #[pyo3(signature = (label=None))]
    fn populations(&self, label: Option<&str>) -> PyResult<Vec<f64>> {
        match label {
            Some(l) => Ok(self.state(l)?.populations()),
            None => Ok(self.0.last().populations()),
        }
    }

    /// State vector at a checkpoint, rotated so its largest entry is real
    /// and positive. Raises for density-matrix runs.
    fn amplitudes(&self, label: &str) -> PyResult<Vec<C64>> {
        match self.state(label)? {
            QuantumState::Pure(s) => Ok(s.phase_aligned()),
            QuantumState::Mixed(_) => Err(PyValueError::new_err("trace holds density matrices")),
        }
    }

    /// Density matrix at a checkpoint (the outer product for pure runs).
    fn density_matrix(&self, label: &str) -> PyResult<Rows> {
        Ok(match self.state(label)? {
            QuantumState::Pure(s) => rows(DensityMatrix::from_pure(s).matrix()),
            QuantumState::Mixed(r) => rows(r.matrix()),
        })
    }

    fn to_json(&self) -> PyResult<String> {
        nmrqip_core::json::to_string(&self.0).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.checkpoints().len()
    }
}

fn trace(program: &Program, initial: &QuantumState, level_name: &str) -> PyResult<PyTrace> {
    algorithms::run(program, initial, level(level_name)?)
        .map(PyTrace)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, target, iterations=1, level="gate"))]
fn grover(n: usize, target: &str, iterations: usize, level: &str) -> PyResult<PyTrace> {
    let program = algorithms::grover_program(n, target, iterations).map_err(err)?;
    trace(
        &program,
        &QuantumState::Pure(StateVector::basis(n, 0).map_err(err)?),
        level,
    )
}

/// QFT applied to the input of the given period (`2^n` means `|0...0>`).
#[pyfunction]
#[pyo3(signature = (n, period, level="gate"))]
fn qft(n: usize, period: usize, level: &str) -> PyResult<PyTrace> {
    let input = algorithms::periodic_input(n, period).map_err(err)?;
    trace(
        &algorithms::qft_program(n).map_err(err)?,
        &QuantumState::Pure(input),
        level,
    )
}

#[pyfunction]
fn pseudo_pure() -> PyResult<PyTrace> {
    algorithms::pseudo_pure_2q()
        .map(|(_, t)| PyTrace(t))
        .map_err(err)
}

/// Runs a gate program given as text (`H q=1,2`, `CPHASE pat=110 angle=pi`, ...).
#[pyfunction]
#[pyo3(signature = (text, initial=None, level="gate", density=false))]
fn run_program(text: &str, initial: Option<&str>, level: &str, density: bool) -> PyResult<PyTrace> {
    let program = Program::parse(text, None).map_err(err)?;
    let psi = match initial {
        Some(bits) => StateVector::from_bits(bits),
        None => StateVector::basis(program.n_qubits(), 0),
    }
    .map_err(err)?;
    let state = if density {
        QuantumState::Mixed(DensityMatrix::from_pure(&psi))
    } else {
        QuantumState::Pure(psi)
    };
    trace(&program, &state, level)
}

#[pymodule]
fn nmrqip(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPulseProgram>()?;
    m.add_class::<PySynthesis>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(synth_phase_gate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(gate_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_phase, m)?)?;
    m.add_function(wrap_pyfunction!(qft_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(equal_up_to_global_phase, m)?)?;
    m.add_function(wrap_pyfunction!(grover, m)?)?;
    m.add_function(wrap_pyfunction!(qft, m)?)?;
    m.add_function(wrap_pyfunction!(pseudo_pure, m)?)?;
    m.add_function(wrap_pyfunction!(run_program, m)?)?;
    Ok(())
}
