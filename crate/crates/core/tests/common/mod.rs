//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls the library's own matrix builders for the quantity
//! under test: gate matrices are written out entry by entry and pulse
//! unitaries come from a Taylor-series matrix exponential.

#![allow(dead_code)]

use nmrqip_core::pulse::{Axis, Control, PulseSpec};
use nmrqip_core::{ComplexMatrix, C64};
use rand::Rng;

/// Bit of qubit `q` (1-based, qubit 1 most significant) in basis index `i`.
pub fn bit(i: usize, q: usize, n: usize) -> u8 {
    ((i >> (n - q)) & 1) as u8
}

/// Diagonal conditional phase gate built directly from a pattern string
/// over `0`, `1` and `e`.
pub fn phase_gate_oracle(pattern: &str, phi: f64) -> ComplexMatrix {
    let chars: Vec<char> = pattern.chars().collect();
    let n = chars.len();
    let dim = 1 << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        let hit = chars.iter().enumerate().all(|(k, &c)| match c {
            '0' => bit(i, k + 1, n) == 0,
            '1' => bit(i, k + 1, n) == 1,
            _ => true,
        });
        m[(i, i)] = if hit {
            C64::from_polar(1.0, phi)
        } else {
            C64::new(1.0, 0.0)
        };
    }
    m
}

/// `2|s><s| - I` for the uniform superposition `|s>` on `n` qubits.
pub fn inversion_oracle(n: usize) -> ComplexMatrix {
    let dim = 1 << n;
    let avg = 2.0 / dim as f64;
    ComplexMatrix::from_fn(dim, dim, |r, c| {
        C64::new(if r == c { avg - 1.0 } else { avg }, 0.0)
    })
}

fn half_pauli(axis: Axis) -> [[C64; 2]; 2] {
    let (z, h, i) = (C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.5));
    match axis {
        Axis::X => [[z, h], [h, z]],
        Axis::MinusX => [[z, -h], [-h, z]],
        Axis::Y => [[z, -i], [i, z]],
        Axis::MinusY => [[z, i], [-i, z]],
        Axis::Z => [[h, z], [z, -h]],
        Axis::MinusZ => [[-h, z], [z, h]],
    }
}

/// Hamiltonian `σ_α/2` on the active qubit, restricted to spectator states
/// allowed by the pattern.
pub fn generator_oracle(p: &PulseSpec) -> ComplexMatrix {
    let n = p.n_qubits();
    let a = p.active();
    let s = half_pauli(p.axis());
    let dim = 1 << n;
    ComplexMatrix::from_fn(dim, dim, |r, c| {
        for q in (1..=n).filter(|&q| q != a) {
            let (br, bc) = (bit(r, q, n), bit(c, q, n));
            let allowed = match p.pattern()[q - 1] {
                Control::Zero => br == 0,
                Control::One => br == 1,
                Control::Any => true,
            };
            if br != bc || !allowed {
                return C64::new(0.0, 0.0);
            }
        }
        s[bit(r, a, n) as usize][bit(c, a, n) as usize]
    })
}

/// `exp(a)` by scaling and squaring around a truncated Taylor series.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let norm: f64 = a.data().iter().map(|z| z.norm()).sum();
    let mut squarings = 0;
    while norm / f64::from(1u32 << squarings) > 0.25 {
        squarings += 1;
    }
    let scaled = a.scale(C64::new(1.0 / f64::from(1u32 << squarings), 0.0));
    let mut sum = ComplexMatrix::identity(a.rows());
    let mut term = ComplexMatrix::identity(a.rows());
    for k in 1..=24 {
        term = term
            .try_mul(&scaled)
            .unwrap()
            .scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum.try_add(&term).unwrap();
    }
    for _ in 0..squarings {
        sum = sum.try_mul(&sum).unwrap();
    }
    sum
}

/// `exp(-iφ σ_α/2 ⊗ projectors)` through the series oracle.
pub fn pulse_oracle(p: &PulseSpec) -> ComplexMatrix {
    expm(&generator_oracle(p).scale(C64::new(0.0, -p.angle())))
}

pub const AXES: [Axis; 6] = [
    Axis::X,
    Axis::MinusX,
    Axis::Y,
    Axis::MinusY,
    Axis::Z,
    Axis::MinusZ,
];

pub fn random_pattern(rng: &mut impl Rng, n: usize) -> Vec<Control> {
    (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => Control::Zero,
            1 => Control::One,
            _ => Control::Any,
        })
        .collect()
}

/// A pulse on 1 to 4 qubits with arbitrary axis, angle and spectator pattern.
pub fn random_pulse(rng: &mut impl Rng, axes: &[Axis]) -> PulseSpec {
    let n = rng.random_range(1..=4);
    let active = rng.random_range(1..=n);
    let axis = axes[rng.random_range(0..axes.len())];
    let angle = rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI);
    PulseSpec::new(axis, angle, active, random_pattern(rng, n)).unwrap()
}
