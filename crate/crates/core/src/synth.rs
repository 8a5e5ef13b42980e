//! Lowering of gates to transition-selective pulse programs.
//!
//! A phase gate conditioned on `m` qubits `q_1, ..., q_m` (in a chosen order)
//! with bits `b_1, ..., b_m` becomes, for each `t`, a z rotation of angle
//! `φ / 2^{m-t}` on `q_t`, axis `+z` for `b_t = 1` and `-z` for `b_t = 0`,
//! selective on the earlier conditioned qubits being at their bits. The
//! product equals `e^{-iφ/2^m} C(φ)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::ConditionPattern;
use crate::pulse::{composite_z, sequence_unitary, Axis, Control, PulseSequence, PulseSpec};
use crate::qstate::{equal_up_to_global_phase, wrap_phase, ComplexMatrix};

/// Tolerance on the residual global phase.
pub const PHASE_TOL: f64 = 1e-9;

/// Output of [`synth_phase_gate`].
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisResult {
    pub sequence: PulseSequence,
    /// Predicted `θ` with `sequence_unitary = e^{iθ} C(φ)`.
    pub expected_phase: f64,
    pub z_pulse_count: usize,
    /// Transition-level (`true`) or merged spin/subset-selective form.
    pub expanded: bool,
}

/// Number of transition-selective z pulses for an `m`-condition gate on `n` qubits.
pub fn expanded_z_pulse_count(n: usize, m: usize) -> usize {
    (1 << n) - (1 << (n - m))
}

fn check_order(c: &ConditionPattern, order: &[usize]) -> Result<()> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != c.conditioned_qubits() {
        return Err(Error::InvalidArgument(format!(
            "order {order:?} is not a permutation of the conditioned qubits {:?} of {c}",
            c.conditioned_qubits()
        )));
    }
    Ok(())
}

/// Compiles `C_c(φ)` into z pulses.
///
/// `order` lists the conditioned qubits in the order they receive the
/// `φ/2^{m-1}, φ/2^{m-2}, ..., φ` rotations; `None` means ascending.
pub fn synth_phase_gate(
    c: &ConditionPattern,
    phi: f64,
    order: Option<&[usize]>,
    expanded: bool,
) -> Result<SynthesisResult> {
    let m = c.m();
    if m == 0 {
        return Err(Error::NoConditionedQubits);
    }
    if !phi.is_finite() {
        return Err(Error::InvalidAngle(phi.to_string()));
    }
    let default_order = c.conditioned_qubits();
    let order = match order {
        Some(o) => {
            check_order(c, o)?;
            o
        }
        None => &default_order,
    };
    let n = c.n_qubits();
    let mut pattern = vec![Control::Any; n];
    let mut sequence = PulseSequence::default();
    for (t, &q) in order.iter().enumerate() {
        let bit = c.get(q);
        let axis = if bit == Control::One {
            Axis::Z
        } else {
            Axis::MinusZ
        };
        let angle = phi / (1u64 << (m - 1 - t)) as f64;
        let pulse = PulseSpec::new(axis, angle, q, pattern.clone())?;
        if expanded {
            for p in pulse.expand_spectators() {
                sequence.push(p)?;
            }
        } else {
            sequence.push(pulse)?;
        }
        pattern[q - 1] = bit;
    }
    Ok(SynthesisResult {
        z_pulse_count: sequence.z_count(),
        sequence,
        expected_phase: -phi / (1u64 << m) as f64,
        expanded,
    })
}

/// Replaces every z pulse by its composite `(π/2)_y (θ)_x (π/2)_{-y}` triple.
pub fn expand_composite(seq: &PulseSequence) -> PulseSequence {
    let mut out = PulseSequence::default();
    for p in seq {
        let parts = if p.axis().is_z() {
            composite_z(p).expect("z-axis pulse")
        } else {
            PulseSequence::new(vec![p.clone()]).expect("single pulse")
        };
        out.extend(parts).expect("pulses share the register");
    }
    out
}

/// SWAP of qubits `i` and `j` as cascades of transition-selective π pulses.
///
/// For every assignment of the other qubits (ascending), with pivot bit `b`
/// equal to the parity of that assignment: `(π)_x` on `j` given `i = b`, on
/// `i` given `j = b`, on `j` given `i = b`. For `swap(1, 3, 3)` this is
/// `[(π)_{00x} (π)_{x00} (π)_{00x}] [(π)_{11x} (π)_{x11} (π)_{11x}]`.
/// The product equals the SWAP up to a diagonal phase matrix.
pub fn synth_swap(i: usize, j: usize, n_qubits: usize) -> Result<PulseSequence> {
    for q in [i, j] {
        if q == 0 || q > n_qubits {
            return Err(Error::InvalidQubit { index: q, n_qubits });
        }
    }
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "SWAP needs distinct qubits, got {i} twice"
        )));
    }
    let others: Vec<usize> = (1..=n_qubits).filter(|q| *q != i && *q != j).collect();
    let mut seq = PulseSequence::default();
    for assign in 0..1usize << others.len() {
        let mut pattern = vec![Control::Any; n_qubits];
        for (k, q) in others.iter().enumerate() {
            pattern[q - 1] = Control::from_bit(assign >> (others.len() - 1 - k) & 1 == 1);
        }
        let pivot = Control::from_bit(assign.count_ones() % 2 == 1);
        let mut outer = pattern.clone();
        outer[i - 1] = pivot;
        let mut middle = pattern;
        middle[j - 1] = pivot;
        seq.push(PulseSpec::new(Axis::X, PI, j, outer.clone())?)?;
        seq.push(PulseSpec::new(Axis::X, PI, i, middle)?)?;
        seq.push(PulseSpec::new(Axis::X, PI, j, outer)?)?;
    }
    Ok(seq)
}

/// Hadamard on each listed qubit as `(π)_x (π/2)_{-y}` spin-selective pulses.
/// The product is `(-i)^{|qubits|}` times the Hadamard.
pub fn synth_hadamard(qubits: &[usize], n_qubits: usize) -> Result<PulseSequence> {
    if qubits.is_empty() {
        return Err(Error::InvalidArgument(
            "Hadamard needs at least one qubit".into(),
        ));
    }
    let mut seen = vec![false; n_qubits + 1];
    let mut seq = PulseSequence::default();
    for &q in qubits {
        if q == 0 || q > n_qubits {
            return Err(Error::InvalidQubit { index: q, n_qubits });
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::InvalidArgument(format!("qubit {q} listed twice")));
        }
        seq.push(PulseSpec::spin_selective(Axis::X, PI, q, n_qubits)?)?;
        seq.push(PulseSpec::spin_selective(
            Axis::MinusY,
            FRAC_PI_2,
            q,
            n_qubits,
        )?)?;
    }
    Ok(seq)
}

/// Result of checking a pulse program against a target gate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub target: String,
    pub max_err: f64,
    pub phase: f64,
    pub pass: bool,
    #[serde(skip)]
    pub expected_phase: Option<f64>,
    /// Per-basis-state phases of `target† · U` for diagonal-phase checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal_phases: Option<Vec<f64>>,
}

impl VerificationReport {
    pub fn labeled(mut self, target: impl Into<String>) -> Self {
        self.target = target.into();
        self
    }
}

fn check_dims(seq: &PulseSequence, target: &ComplexMatrix) -> Result<ComplexMatrix> {
    let u = sequence_unitary(seq)?;
    if u.rows() != target.rows() || u.cols() != target.cols() {
        return Err(Error::dims(u.shape_string(), target.shape_string()));
    }
    Ok(u)
}

/// Checks `sequence_unitary(seq) = e^{iθ} target` within `tol`, and, when
/// `expected_phase` is given, `θ` against it within [`PHASE_TOL`] (mod 2π).
pub fn verify_sequence(
    seq: &PulseSequence,
    target: &ComplexMatrix,
    expected_phase: Option<f64>,
    tol: f64,
) -> Result<VerificationReport> {
    let u = check_dims(seq, target)?;
    let m = equal_up_to_global_phase(&u, target, tol)?;
    let phase_ok = expected_phase.is_none_or(|e| wrap_phase(m.phase - e).abs() <= PHASE_TOL);
    Ok(VerificationReport {
        target: String::new(),
        max_err: m.max_err,
        phase: m.phase,
        pass: m.equal && phase_ok,
        expected_phase,
        diagonal_phases: None,
    })
}

/// Checks `sequence_unitary(seq) = target · D` for a diagonal unitary `D`,
/// which leaves every computational-basis population unchanged.
///
/// `max_err` is the largest deviation of `target† U` from a diagonal unitary;
/// `phase` is the phase of its first diagonal entry.
pub fn verify_up_to_diagonal(
    seq: &PulseSequence,
    target: &ComplexMatrix,
    tol: f64,
) -> Result<VerificationReport> {
    let u = check_dims(seq, target)?;
    let d = target.adjoint().try_mul(&u)?;
    let mut max_err: f64 = 0.0;
    for r in 0..d.rows() {
        for c in 0..d.cols() {
            let err = if r == c {
                (d[(r, c)].norm() - 1.0).abs()
            } else {
                d[(r, c)].norm()
            };
            max_err = max_err.max(err);
        }
    }
    let phases: Vec<f64> = d.diagonal().iter().map(|z| z.arg()).collect();
    Ok(VerificationReport {
        target: String::new(),
        max_err,
        phase: phases[0],
        pass: max_err <= tol,
        expected_phase: None,
        diagonal_phases: Some(phases),
    })
}
