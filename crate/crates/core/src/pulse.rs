//! Transition- and spin-selective rotation pulses.
//!
//! A pulse `(θ)_α` on qubit `q` with spectator pattern `P` is
//! `exp(-i θ G)`, `G = ⊗_k g_k` where `g_q = σ_α / 2` and every spectator
//! factor is `|0><0|`, `|1><1|` or the identity according to `P`.
//! Sequences are stored in time order; the matrix of a sequence is the
//! product taken right to left.

use std::fmt;
use std::str::FromStr;

use crate::angle::parse_angle;
use crate::error::{Error, Result};
use crate::qstate::{ComplexMatrix, C64, ONE, ZERO};

/// Rotation axis, including the negated axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    MinusX,
    Y,
    MinusY,
    Z,
    MinusZ,
}

impl Axis {
    pub fn negate(self) -> Axis {
        match self {
            Axis::X => Axis::MinusX,
            Axis::MinusX => Axis::X,
            Axis::Y => Axis::MinusY,
            Axis::MinusY => Axis::Y,
            Axis::Z => Axis::MinusZ,
            Axis::MinusZ => Axis::Z,
        }
    }

    pub fn is_z(self) -> bool {
        matches!(self, Axis::Z | Axis::MinusZ)
    }

    /// `+1.0` for the positive axes, `-1.0` for the negated ones.
    pub fn sign(self) -> f64 {
        match self {
            Axis::X | Axis::Y | Axis::Z => 1.0,
            Axis::MinusX | Axis::MinusY | Axis::MinusZ => -1.0,
        }
    }

    /// Signed Pauli matrix `σ_α`.
    pub fn pauli(self) -> ComplexMatrix {
        let s = C64::new(self.sign(), 0.0);
        let m = match self {
            Axis::X | Axis::MinusX => [[ZERO, ONE], [ONE, ZERO]],
            Axis::Y | Axis::MinusY => [[ZERO, -C64::i()], [C64::i(), ZERO]],
            Axis::Z | Axis::MinusZ => [[ONE, ZERO], [ZERO, -ONE]],
        };
        ComplexMatrix::from_fn(2, 2, |r, c| m[r][c] * s)
    }

    /// `cos(θ/2) I − i sin(θ/2) σ_α`.
    fn rotation(self, angle: f64) -> [[C64; 2]; 2] {
        let half = 0.5 * angle * self.sign();
        let (s, c) = half.sin_cos();
        match self {
            Axis::X | Axis::MinusX => [
                [C64::new(c, 0.0), C64::new(0.0, -s)],
                [C64::new(0.0, -s), C64::new(c, 0.0)],
            ],
            Axis::Y | Axis::MinusY => [
                [C64::new(c, 0.0), C64::new(-s, 0.0)],
                [C64::new(s, 0.0), C64::new(c, 0.0)],
            ],
            Axis::Z | Axis::MinusZ => [[C64::new(c, -s), ZERO], [ZERO, C64::new(c, s)]],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::MinusX => "-x",
            Axis::Y => "y",
            Axis::MinusY => "-y",
            Axis::Z => "z",
            Axis::MinusZ => "-z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Axis> {
        Ok(match s {
            "x" | "+x" => Axis::X,
            "-x" => Axis::MinusX,
            "y" | "+y" => Axis::Y,
            "-y" => Axis::MinusY,
            "z" | "+z" => Axis::Z,
            "-z" => Axis::MinusZ,
            other => return Err(Error::InvalidArgument(format!("unknown axis '{other}'"))),
        })
    }
}

/// Per-qubit selector: a fixed basis value or unconstrained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Control {
    Zero,
    One,
    Any,
}

impl Control {
    pub fn from_bit(bit: bool) -> Control {
        if bit {
            Control::One
        } else {
            Control::Zero
        }
    }

    pub fn matches(self, bit: bool) -> bool {
        match self {
            Control::Zero => !bit,
            Control::One => bit,
            Control::Any => true,
        }
    }

    pub fn is_fixed(self) -> bool {
        self != Control::Any
    }

    fn projector(self) -> ComplexMatrix {
        match self {
            Control::Zero => ComplexMatrix::from_diagonal(&[ONE, ZERO]),
            Control::One => ComplexMatrix::from_diagonal(&[ZERO, ONE]),
            Control::Any => ComplexMatrix::identity(2),
        }
    }
}

/// Bit of qubit `q` (1-based, qubit 1 = MSB) in an `n`-qubit basis index.
pub(crate) fn qubit_mask(q: usize, n: usize) -> usize {
    1 << (n - q)
}

/// A single rotation pulse.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSpec {
    axis: Axis,
    angle: f64,
    active: usize,
    pattern: Vec<Control>,
}

impl PulseSpec {
    /// `pattern` has one entry per qubit; the entry at `active` (1-based) is ignored.
    pub fn new(axis: Axis, angle: f64, active: usize, mut pattern: Vec<Control>) -> Result<Self> {
        let n = pattern.len();
        if active == 0 || active > n {
            return Err(Error::InvalidQubit {
                index: active,
                n_qubits: n,
            });
        }
        if !angle.is_finite() {
            return Err(Error::InvalidAngle(angle.to_string()));
        }
        pattern[active - 1] = Control::Any;
        Ok(PulseSpec {
            axis,
            angle,
            active,
            pattern,
        })
    }

    /// Pulse on `active` for every spectator state.
    pub fn spin_selective(axis: Axis, angle: f64, active: usize, n_qubits: usize) -> Result<Self> {
        Self::new(axis, angle, active, vec![Control::Any; n_qubits])
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn pattern(&self) -> &[Control] {
        &self.pattern
    }

    pub fn n_qubits(&self) -> usize {
        self.pattern.len()
    }

    pub fn with_axis_angle(&self, axis: Axis, angle: f64) -> PulseSpec {
        PulseSpec {
            axis,
            angle,
            ..self.clone()
        }
    }

    fn spectators(&self) -> impl Iterator<Item = (usize, Control)> + '_ {
        let active = self.active;
        self.pattern
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1, *c))
            .filter(move |(q, _)| *q != active)
    }

    pub fn is_spin_selective(&self) -> bool {
        self.spectators().all(|(_, c)| c == Control::Any)
    }

    pub fn is_transition_selective(&self) -> bool {
        self.spectators().all(|(_, c)| c.is_fixed())
    }

    /// Pattern string with `*` at the active position.
    pub fn pattern_string(&self) -> String {
        self.pattern
            .iter()
            .map(|c| match c {
                Control::Zero => '0',
                Control::One => '1',
                Control::Any => '*',
            })
            .collect()
    }

    fn matches_spectators(&self, index: usize) -> bool {
        let n = self.n_qubits();
        self.spectators()
            .all(|(q, c)| c.matches(index & qubit_mask(q, n) != 0))
    }

    /// Basis index pairs `(i0, i1)` coupled by this pulse; `i0` has the active qubit at 0.
    fn coupled_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n_qubits();
        let mask = qubit_mask(self.active, n);
        (0..1usize << n)
            .filter(move |i| i & mask == 0 && self.matches_spectators(*i))
            .map(move |i| (i, i | mask))
    }

    /// Left-multiplies the rows of `m` (a `2^N`-row matrix) by this pulse in place.
    pub(crate) fn apply_left(&self, m: &mut ComplexMatrix) {
        let r = self.axis.rotation(self.angle);
        let cols = m.cols();
        for (i0, i1) in self.coupled_pairs() {
            for c in 0..cols {
                let a = m[(i0, c)];
                let b = m[(i1, c)];
                m[(i0, c)] = r[0][0] * a + r[0][1] * b;
                m[(i1, c)] = r[1][0] * a + r[1][1] * b;
            }
        }
    }

    /// Every `*` spectator enumerated into `{0, 1}`, first free qubit most significant.
    pub fn expand_spectators(&self) -> Vec<PulseSpec> {
        let free: Vec<usize> = self
            .spectators()
            .filter(|(_, c)| *c == Control::Any)
            .map(|(q, _)| q)
            .collect();
        (0..1usize << free.len())
            .map(|assign| {
                let mut p = self.clone();
                for (k, q) in free.iter().enumerate() {
                    let bit = assign >> (free.len() - 1 - k) & 1 == 1;
                    p.pattern[q - 1] = Control::from_bit(bit);
                }
                p
            })
            .collect()
    }
}

impl fmt::Display for PulseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} q{} pat={}",
            self.axis,
            self.angle,
            self.active,
            self.pattern_string()
        )
    }
}

/// Hermitian generator `G` with `pulse_unitary(p) = exp(-i·angle·G)`.
pub fn generator(p: &PulseSpec, n_qubits: usize) -> Result<ComplexMatrix> {
    if p.n_qubits() != n_qubits {
        return Err(Error::InvalidPattern(format!(
            "pattern length {} for {} qubits",
            p.n_qubits(),
            n_qubits
        )));
    }
    let half = C64::new(0.5, 0.0);
    let factor = |q: usize| {
        if q == p.active {
            p.axis.pauli().scale(half)
        } else {
            p.pattern[q - 1].projector()
        }
    };
    Ok((2..=n_qubits).fold(factor(1), |acc, q| acc.kron(&factor(q))))
}

/// Closed-form `exp(-i·angle·G)`: identity outside the selected subspace, the
/// 2x2 rotation on every coupled pair of levels inside it.
pub fn pulse_unitary(p: &PulseSpec) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(1 << p.n_qubits());
    let r = p.axis.rotation(p.angle);
    for (i0, i1) in p.coupled_pairs() {
        u[(i0, i0)] = r[0][0];
        u[(i0, i1)] = r[0][1];
        u[(i1, i0)] = r[1][0];
        u[(i1, i1)] = r[1][1];
    }
    u
}

/// Time-ordered list of pulses on a common register.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PulseSequence {
    pulses: Vec<PulseSpec>,
}

impl PulseSequence {
    pub fn new(pulses: Vec<PulseSpec>) -> Result<Self> {
        let mut seq = PulseSequence::default();
        for p in pulses {
            seq.push(p)?;
        }
        Ok(seq)
    }

    pub fn push(&mut self, p: PulseSpec) -> Result<()> {
        if let Some(n) = self.n_qubits() {
            if p.n_qubits() != n {
                return Err(Error::InvalidPattern(format!(
                    "pulse on {} qubits in a {n}-qubit sequence",
                    p.n_qubits()
                )));
            }
        }
        self.pulses.push(p);
        Ok(())
    }

    pub fn extend(&mut self, other: PulseSequence) -> Result<()> {
        other.pulses.into_iter().try_for_each(|p| self.push(p))
    }

    /// `None` for an empty sequence.
    pub fn n_qubits(&self) -> Option<usize> {
        self.pulses.first().map(PulseSpec::n_qubits)
    }

    pub fn pulses(&self) -> &[PulseSpec] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PulseSpec> {
        self.pulses.iter()
    }

    pub fn z_count(&self) -> usize {
        self.pulses.iter().filter(|p| p.axis.is_z()).count()
    }
}

impl<'a> IntoIterator for &'a PulseSequence {
    type Item = &'a PulseSpec;
    type IntoIter = std::slice::Iter<'a, PulseSpec>;

    fn into_iter(self) -> Self::IntoIter {
        self.pulses.iter()
    }
}

/// `U_k ··· U_2 U_1` for the time-ordered pulses `U_1, ..., U_k`.
pub fn sequence_unitary(seq: &PulseSequence) -> Result<ComplexMatrix> {
    let n = seq.n_qubits().ok_or(Error::EmptySequence)?;
    let mut u = ComplexMatrix::identity(1 << n);
    for p in seq {
        p.apply_left(&mut u);
    }
    Ok(u)
}

/// Realizes a z rotation as `(π/2)_y (θ)_x (π/2)_{-y}` in time order, with the
/// selectivity of `p`. A `-z` pulse negates the x angle.
pub fn composite_z(p: &PulseSpec) -> Result<PulseSequence> {
    let x_angle = match p.axis {
        Axis::Z => p.angle,
        Axis::MinusZ => -p.angle,
        other => return Err(Error::NotZAxis(other.to_string())),
    };
    let quarter = std::f64::consts::FRAC_PI_2;
    Ok(PulseSequence {
        pulses: vec![
            p.with_axis_angle(Axis::Y, quarter),
            p.with_axis_angle(Axis::X, x_angle),
            p.with_axis_angle(Axis::MinusY, quarter),
        ],
    })
}

fn parse_pulse_line(line: &str, lineno: usize) -> Result<PulseSpec> {
    let err = |m: String| Error::parse(lineno, m);
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let [axis, angle, qubit, pat] = tokens[..] else {
        return Err(err(format!(
            "expected '<axis> <angle> q<index> pat=<pattern>', got '{line}'"
        )));
    };
    let axis: Axis = axis.parse().map_err(|e: Error| err(e.to_string()))?;
    let angle = parse_angle(angle).map_err(|e| err(e.to_string()))?;
    let active: usize = qubit
        .strip_prefix('q')
        .and_then(|q| q.parse().ok())
        .ok_or_else(|| err(format!("bad qubit token '{qubit}'")))?;
    let pat = pat
        .strip_prefix("pat=")
        .ok_or_else(|| err(format!("bad pattern token '{pat}'")))?;
    let pattern = pat
        .chars()
        .map(|c| match c {
            '0' => Ok(Control::Zero),
            '1' => Ok(Control::One),
            '*' => Ok(Control::Any),
            other => Err(err(format!("bad pattern character '{other}'"))),
        })
        .collect::<Result<Vec<_>>>()?;
    if active >= 1 && active <= pattern.len() && pattern[active - 1] != Control::Any {
        return Err(err(format!(
            "active qubit q{active} must be '*' in the pattern"
        )));
    }
    PulseSpec::new(axis, angle, active, pattern).map_err(|e| err(e.to_string()))
}

/// Parses the pulse-program text format, one pulse per line in time order.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_program(text: &str) -> Result<PulseSequence> {
    let mut seq = PulseSequence::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = parse_pulse_line(line, i + 1)?;
        seq.push(p)
            .map_err(|e| Error::parse(i + 1, e.to_string()))?;
    }
    Ok(seq)
}

pub fn serialize_program(seq: &PulseSequence) -> String {
    seq.iter().map(|p| format!("{p}\n")).collect()
}
