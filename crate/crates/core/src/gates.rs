//! Ideal gate matrices.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::angle::parse_angle;
use crate::error::{Error, Result};
use crate::pulse::{qubit_mask, Control};
use crate::qstate::{ComplexMatrix, C64, ONE};

/// Condition of a phase gate: per qubit `0`, `1` or `ε` (unconditioned).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConditionPattern(Vec<Control>);

impl ConditionPattern {
    pub fn new(entries: Vec<Control>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidPattern("empty condition pattern".into()));
        }
        Ok(ConditionPattern(entries))
    }

    /// Pattern fixing every qubit to `bits`.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        Self::new(bits.iter().map(|&b| Control::from_bit(b)).collect())
    }

    pub fn all_zeros(n_qubits: usize) -> Result<Self> {
        Self::new(vec![Control::Zero; n_qubits])
    }

    pub fn entries(&self) -> &[Control] {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    /// Conditioned (non-ε) qubit count.
    pub fn m(&self) -> usize {
        self.0.iter().filter(|c| c.is_fixed()).count()
    }

    /// 1-based indices of the conditioned qubits, ascending.
    pub fn conditioned_qubits(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_fixed())
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn get(&self, qubit: usize) -> Control {
        self.0[qubit - 1]
    }

    pub fn matches(&self, index: usize) -> bool {
        let n = self.n_qubits();
        self.0
            .iter()
            .enumerate()
            .all(|(i, c)| c.matches(index & qubit_mask(i + 1, n) != 0))
    }
}

impl FromStr for ConditionPattern {
    type Err = Error;

    /// Accepts `0`, `1` and any of `e`, `ε`, `*` for an unconditioned qubit.
    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Control::Zero),
                '1' => Ok(Control::One),
                'e' | 'E' | 'ε' | '*' => Ok(Control::Any),
                other => Err(Error::InvalidPattern(format!(
                    "'{other}' in condition pattern '{s}'"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

impl fmt::Display for ConditionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            f.write_str(match c {
                Control::Zero => "0",
                Control::One => "1",
                Control::Any => "e",
            })?;
        }
        Ok(())
    }
}

/// Diagonal gate putting `e^{iφ}` on every basis state that matches `c`.
pub fn conditional_phase(c: &ConditionPattern, phi: f64) -> ComplexMatrix {
    let shift = C64::from_polar(1.0, phi);
    let diag: Vec<C64> = (0..1usize << c.n_qubits())
        .map(|i| if c.matches(i) { shift } else { ONE })
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

fn h1() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |r, c| {
        C64::new(
            if r == 1 && c == 1 {
                -FRAC_1_SQRT_2
            } else {
                FRAC_1_SQRT_2
            },
            0.0,
        )
    })
}

fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q == 0 || q > n {
        Err(Error::InvalidQubit {
            index: q,
            n_qubits: n,
        })
    } else {
        Ok(())
    }
}

/// Tensor product with a Hadamard on every qubit of `qubits`, identity elsewhere.
pub fn hadamard(n_qubits: usize, qubits: &[usize]) -> Result<ComplexMatrix> {
    if qubits.is_empty() {
        return Err(Error::InvalidArgument(
            "Hadamard needs at least one qubit".into(),
        ));
    }
    for &q in qubits {
        check_qubit(q, n_qubits)?;
    }
    let factor = |q: usize| {
        if qubits.contains(&q) {
            h1()
        } else {
            ComplexMatrix::identity(2)
        }
    };
    Ok((2..=n_qubits).fold(factor(1), |acc, q| acc.kron(&factor(q))))
}

pub fn hadamard_all(n_qubits: usize) -> Result<ComplexMatrix> {
    hadamard(n_qubits, &(1..=n_qubits).collect::<Vec<_>>())
}

/// `Λ = 2A − I` with `A_ij = 2^{-N}`.
pub fn inversion_about_average(n_qubits: usize) -> Result<ComplexMatrix> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("inversion needs N >= 1".into()));
    }
    let dim = 1usize << n_qubits;
    let avg = 2.0 / dim as f64;
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| {
        C64::new(if r == c { avg - 1.0 } else { avg }, 0.0)
    }))
}

/// `QFT[x'][x] = e^{2πi x x'/q} / √q`, `q = 2^n`.
pub fn qft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("QFT needs n >= 1".into()));
    }
    let q = 1usize << n;
    let norm = 1.0 / (q as f64).sqrt();
    Ok(ComplexMatrix::from_fn(q, q, |xp, x| {
        // reduce x·x' mod q before scaling so large products stay exact
        let k = (x * xp) % q;
        C64::from_polar(norm, TAU * k as f64 / q as f64)
    }))
}

/// Permutation exchanging qubits `i` and `j`.
pub fn swap(i: usize, j: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    check_qubit(i, n_qubits)?;
    check_qubit(j, n_qubits)?;
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "SWAP needs distinct qubits, got {i} twice"
        )));
    }
    let (mi, mj) = (qubit_mask(i, n_qubits), qubit_mask(j, n_qubits));
    let dim = 1usize << n_qubits;
    let target = |x: usize| {
        let (bi, bj) = (x & mi != 0, x & mj != 0);
        if bi == bj {
            x
        } else {
            x ^ mi ^ mj
        }
    };
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| {
        if target(c) == r {
            ONE
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Phase gate `diag(1, e^{2πi/2^k})`.
pub fn r_k(k: u32) -> Result<ComplexMatrix> {
    if k == 0 || k > 62 {
        return Err(Error::InvalidArgument(format!(
            "R_k needs 1 <= k <= 62, got {k}"
        )));
    }
    Ok(ComplexMatrix::from_diagonal(&[
        ONE,
        C64::from_polar(1.0, r_k_angle(k)),
    ]))
}

/// A gate addressable by name: `Cphase(pattern,angle)`, `H(qubits)`, `QFT(n)`,
/// `SWAP(i,j)`, `Rk(k)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Cphase(ConditionPattern, f64),
    H(Vec<usize>),
    Qft(usize),
    Swap(usize, usize),
    Rk(u32),
}

impl Gate {
    /// The gate as an operator on `n_qubits` qubits.
    pub fn matrix(&self, n_qubits: usize) -> Result<ComplexMatrix> {
        let mismatch = |needed: usize| {
            Err(Error::dims(
                format!("{needed} qubits for {self}"),
                format!("{n_qubits} qubits"),
            ))
        };
        match self {
            Gate::Cphase(c, phi) => {
                if c.n_qubits() != n_qubits {
                    return mismatch(c.n_qubits());
                }
                Ok(conditional_phase(c, *phi))
            }
            Gate::H(qs) => hadamard(n_qubits, qs),
            Gate::Qft(n) => {
                if *n != n_qubits {
                    return mismatch(*n);
                }
                qft_matrix(*n)
            }
            Gate::Swap(i, j) => swap(*i, *j, n_qubits),
            Gate::Rk(k) => {
                if n_qubits != 1 {
                    return mismatch(1);
                }
                r_k(*k)
            }
        }
    }

    /// Qubit count implied by the gate alone, where it fixes one.
    pub fn natural_qubits(&self) -> Option<usize> {
        match self {
            Gate::Cphase(c, _) => Some(c.n_qubits()),
            Gate::Qft(n) => Some(*n),
            Gate::Rk(_) => Some(1),
            Gate::H(_) | Gate::Swap(..) => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Cphase(c, phi) => write!(f, "Cphase({c},{phi})"),
            Gate::H(qs) => {
                let qs: Vec<String> = qs.iter().map(ToString::to_string).collect();
                write!(f, "H({})", qs.join(","))
            }
            Gate::Qft(n) => write!(f, "QFT({n})"),
            Gate::Swap(i, j) => write!(f, "SWAP({i},{j})"),
            Gate::Rk(k) => write!(f, "Rk({k})"),
        }
    }
}

fn parse_index(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad integer '{s}'")))
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Gate> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("unrecognized gate '{s}'"));
        let open = s.find('(').ok_or_else(bad)?;
        let args = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        match (
            s[..open].trim().to_ascii_lowercase().as_str(),
            args.as_slice(),
        ) {
            ("cphase", [pat, angle]) => Ok(Gate::Cphase(pat.parse()?, parse_angle(angle)?)),
            ("h", qs) => Ok(Gate::H(
                qs.iter().map(|q| parse_index(q)).collect::<Result<_>>()?,
            )),
            ("qft", [n]) => Ok(Gate::Qft(parse_index(n)?)),
            ("swap", [i, j]) => Ok(Gate::Swap(parse_index(i)?, parse_index(j)?)),
            ("rk", [k]) => {
                Ok(Gate::Rk(k.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad k '{k}'"))
                })?))
            }
            _ => Err(bad()),
        }
    }
}

/// Phase angle `2π/2^k` of `R_k`.
pub fn r_k_angle(k: u32) -> f64 {
    2.0 * PI / (1u64 << k) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{apply, equal_up_to_global_phase, StateVector, DEFAULT_TOL, ZERO};

    fn e(theta: f64) -> C64 {
        C64::from_polar(1.0, theta)
    }

    fn cp(s: &str) -> ConditionPattern {
        s.parse().unwrap()
    }

    #[test]
    fn two_qubit_controlled_phase() {
        let phi = 0.7;
        let expected = ComplexMatrix::from_diagonal(&[ONE, ONE, ONE, e(phi)]);
        assert_eq!(conditional_phase(&cp("11"), phi), expected);
    }

    #[test]
    fn three_qubit_phase_gates() {
        let phi = -1.9;
        let mut d = vec![ONE; 8];
        d[7] = e(phi);
        assert_eq!(
            conditional_phase(&cp("111"), phi),
            ComplexMatrix::from_diagonal(&d)
        );
        d[6] = e(phi);
        assert_eq!(
            conditional_phase(&cp("11e"), phi),
            ComplexMatrix::from_diagonal(&d)
        );
        assert_eq!(
            conditional_phase(&cp("11ε"), phi),
            ComplexMatrix::from_diagonal(&d)
        );
    }

    #[test]
    fn one_qubit_phase_gates() {
        let phi = 0.4;
        let c1 = conditional_phase(&cp("1"), phi);
        let c0 = conditional_phase(&cp("0"), phi);
        assert_eq!(c1, ComplexMatrix::from_diagonal(&[ONE, e(phi)]));
        // C0(φ) = e^{iφ} C1(−φ)
        let rhs = conditional_phase(&cp("1"), -phi).scale(e(phi));
        assert!(c0.max_abs_diff(&rhs).unwrap() < 1e-15);
    }

    #[test]
    fn pattern_metadata() {
        let c = cp("1e0");
        assert_eq!(c.m(), 2);
        assert_eq!(c.conditioned_qubits(), vec![1, 3]);
        assert_eq!(c.to_string(), "1e0");
        assert!(cp("eee").m() == 0);
        assert!("".parse::<ConditionPattern>().is_err());
        assert!("12".parse::<ConditionPattern>().is_err());
    }

    #[test]
    fn hadamard_single_and_involution() {
        let h = hadamard(1, &[1]).unwrap();
        assert!((h[(0, 0)].re - FRAC_1_SQRT_2).abs() < 1e-16);
        assert!((h[(1, 1)].re + FRAC_1_SQRT_2).abs() < 1e-16);
        let hh = &h * &h;
        assert!(hh.max_abs_diff(&ComplexMatrix::identity(2)).unwrap() < 1e-15);
        let h3 = hadamard(3, &[1, 3]).unwrap();
        assert!(
            (&h3 * &h3)
                .max_abs_diff(&ComplexMatrix::identity(8))
                .unwrap()
                < 1e-15
        );
        assert!(hadamard(2, &[]).is_err());
        assert!(hadamard(2, &[3]).is_err());
    }

    #[test]
    fn hadamard_all_makes_uniform_superposition() {
        let s = apply(
            &hadamard_all(3).unwrap(),
            &StateVector::basis(3, 0).unwrap(),
        )
        .unwrap();
        for a in s.amplitudes() {
            assert!((a - C64::new(1.0 / (2.0 * 2f64.sqrt()), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn inversion_three_qubits() {
        let l = inversion_about_average(3).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let want = if r == c { -0.75 } else { 0.25 };
                assert!((l[(r, c)] - C64::new(want, 0.0)).norm() < 1e-16);
            }
        }
        assert!((&l * &l).max_abs_diff(&ComplexMatrix::identity(8)).unwrap() < 1e-15);
    }

    #[test]
    fn inversion_equals_h_c0_h() {
        for n in 1..=4 {
            let h = hadamard_all(n).unwrap();
            let prod =
                &(&h * &conditional_phase(&ConditionPattern::all_zeros(n).unwrap(), PI)) * &h;
            let m =
                equal_up_to_global_phase(&inversion_about_average(n).unwrap(), &prod, DEFAULT_TOL)
                    .unwrap();
            assert!(m.equal, "n={n} err={}", m.max_err);
        }
    }

    #[test]
    fn qft_one_qubit_is_hadamard() {
        let q = qft_matrix(1).unwrap();
        assert!(q.max_abs_diff(&hadamard(1, &[1]).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn qft_on_period_four_input() {
        // direct sum: (|0> + |4>)/√2 → Σ_x' (1 + e^{iπ x'})/4 |x'>
        let s = StateVector::new(
            (0..8)
                .map(|i| {
                    if i == 0 || i == 4 {
                        C64::new(FRAC_1_SQRT_2, 0.0)
                    } else {
                        ZERO
                    }
                })
                .collect(),
        )
        .unwrap();
        let out = apply(&qft_matrix(3).unwrap(), &s).unwrap();
        for (i, a) in out.amplitudes().iter().enumerate() {
            let want = if i % 2 == 0 { 0.5 } else { 0.0 };
            assert!((a - C64::new(want, 0.0)).norm() < 1e-15, "index {i}");
        }
    }

    #[test]
    fn qft_unitary_and_squares_to_negation() {
        for n in 1..=4 {
            let q = qft_matrix(n).unwrap();
            assert!(q.is_unitary(DEFAULT_TOL));
            let q2 = &q * &q;
            let dim = 1usize << n;
            for x in 0..dim {
                let out = apply(&q2, &StateVector::basis(n, x).unwrap()).unwrap();
                let mirror = (dim - x) % dim;
                assert!((out.amplitudes()[mirror] - ONE).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn swap_exchanges_bits() {
        let s = swap(1, 3, 3).unwrap();
        let out = apply(&s, &StateVector::from_bits("110").unwrap()).unwrap();
        assert_eq!(out, StateVector::from_bits("011").unwrap());
        assert_eq!(&s * &s, ComplexMatrix::identity(8));
        assert!(swap(2, 2, 3).is_err());
        assert!(swap(1, 4, 3).is_err());
    }

    #[test]
    fn r_k_values() {
        assert!(
            r_k(1)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::from_diagonal(&[ONE, -ONE]))
                .unwrap()
                < 1e-15
        );
        assert!(
            r_k(2)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::from_diagonal(&[ONE, C64::i()]))
                .unwrap()
                < 1e-15
        );
        assert!(
            r_k(3)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::from_diagonal(&[ONE, e(PI / 4.0)]))
                .unwrap()
                < 1e-15
        );
        assert!(r_k(0).is_err());
    }

    #[test]
    fn reduced_gate_is_product_of_full_gates() {
        for &phi in &[0.3, -2.0, PI] {
            let lhs = conditional_phase(&cp("11e"), phi);
            let rhs = &conditional_phase(&cp("111"), phi) * &conditional_phase(&cp("110"), phi);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn gate_names_parse() {
        assert_eq!(
            "Cphase(111,pi)".parse::<Gate>().unwrap(),
            Gate::Cphase(cp("111"), PI)
        );
        assert_eq!("H(1,2,3)".parse::<Gate>().unwrap(), Gate::H(vec![1, 2, 3]));
        assert_eq!("QFT(3)".parse::<Gate>().unwrap(), Gate::Qft(3));
        assert_eq!("SWAP(1, 3)".parse::<Gate>().unwrap(), Gate::Swap(1, 3));
        assert_eq!("Rk(2)".parse::<Gate>().unwrap(), Gate::Rk(2));
        for bad in ["Foo(1)", "Cphase(11)", "H", "QFT(x)", "SWAP(1,2,3)"] {
            assert!(bad.parse::<Gate>().is_err(), "{bad}");
        }
        let g: Gate = "Cphase(11e,pi/2)".parse().unwrap();
        assert_eq!(
            g.matrix(3).unwrap(),
            conditional_phase(&cp("11e"), PI / 2.0)
        );
        assert!(g.matrix(2).is_err());
        assert!(Gate::Rk(2).matrix(1).is_ok());
        assert!(Gate::Qft(3).matrix(2).is_err());
    }

    #[test]
    fn r_k_angle_matches_r_k() {
        for k in 1..6 {
            assert!((r_k(k).unwrap()[(1, 1)] - e(r_k_angle(k))).norm() < 1e-15);
        }
    }
}
