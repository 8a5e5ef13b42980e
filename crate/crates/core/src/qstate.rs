//! Dense complex matrices and quantum-state containers.
//!
//! Basis ordering: qubit 1 is the most significant bit of a basis index, so
//! `|b1 b2 b3>` lives at index `4*b1 + 2*b2 + b3`.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for exact-algebra comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Number of qubits for a register of dimension `dim`, if `dim` is `2^n`, `n >= 1`.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim >= 2 && dim.is_power_of_two() {
        Ok(dim.trailing_zeros() as usize)
    } else {
        Err(Error::NotPowerOfTwo(dim))
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    t
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidArgument("matrix must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::dims(
                    format!("{n_cols} columns"),
                    format!("{} in row {r}", row.len()),
                ));
            }
            data.extend(row);
        }
        Ok(ComplexMatrix {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    /// Builds a matrix from real-valued rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Qubit count of a square `2^N x 2^N` operator.
    pub fn n_qubits(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::dims("square matrix", self.shape_string()));
        }
        qubits_for_dim(self.rows)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub(crate) fn shape_string(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    fn check_same_shape(&self, other: &ComplexMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(self.shape_string(), other.shape_string()));
        }
        Ok(())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn try_add(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &ComplexMatrix) -> Result<Self> {
        self.try_add(&other.scale(-ONE))
    }

    pub fn try_mul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dims(
                format!("{} rows", self.cols),
                format!("{} rows", other.rows),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::dims(format!("length {}", self.cols), v.len()));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = &self.adjoint() * self;
        prod.max_abs_diff(&Self::identity(self.rows))
            .unwrap_or(f64::INFINITY)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()).is_ok_and(|e| e <= tol)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self[(r, c)].norm() <= tol))
    }

    pub fn commutes_with(&self, other: &ComplexMatrix, tol: f64) -> Result<bool> {
        let ab = self.try_mul(other)?;
        let ba = other.try_mul(self)?;
        Ok(ab.max_abs_diff(&ba)? <= tol)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &mut self.data[r * self.cols + c]
    }
}

/// Matrix product. Panics on incompatible shapes; use [`ComplexMatrix::try_mul`]
/// when the shapes are not known to agree.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let cells: Vec<String> = self
                .row(r)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Outcome of a global-phase comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseMatch {
    pub equal: bool,
    /// `theta` in `(-pi, pi]` such that `U ≈ e^{i theta} V`.
    pub phase: f64,
    /// `‖U − e^{i theta} V‖_max`.
    pub max_err: f64,
}

/// Index of the first entry of largest modulus.
fn pivot_index(values: &[C64]) -> usize {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, v) in values.iter().enumerate() {
        let n = v.norm();
        if n > best_norm {
            best = i;
            best_norm = n;
        }
    }
    best
}

fn phase_align(u: &[C64], v: &[C64], tol: f64) -> Result<PhaseMatch> {
    let k = pivot_index(v);
    if v[k].norm() <= tol {
        return Err(Error::ZeroReference(tol));
    }
    let theta = (u[k] * v[k].conj()).arg();
    let rot = C64::from_polar(1.0, theta);
    let max_err = u
        .iter()
        .zip(v)
        .map(|(a, b)| (a - rot * b).norm())
        .fold(0.0, f64::max);
    Ok(PhaseMatch {
        equal: max_err <= tol,
        phase: theta,
        max_err,
    })
}

/// Tests `U = e^{i theta} V` for some real `theta`, estimating `theta` from
/// the largest-modulus entry of `V`.
pub fn equal_up_to_global_phase(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: f64,
) -> Result<PhaseMatch> {
    u.check_same_shape(v)?;
    phase_align(&u.data, &v.data, tol)
}

/// Pure state of an `N`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Builds a state from amplitudes; the length must be `2^N` and the norm 1 (to 1e-9).
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        qubits_for_dim(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(StateVector { amps })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if n_qubits == 0 || index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} outside a {n_qubits}-qubit register"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(StateVector { amps })
    }

    /// Computational basis state from a bit string such as `"110"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let index = parse_bitstring(bits)?;
        Self::basis(bits.len(), index)
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn equal_up_to_global_phase(&self, other: &StateVector, tol: f64) -> Result<PhaseMatch> {
        if self.dim() != other.dim() {
            return Err(Error::dims(other.dim(), self.dim()));
        }
        phase_align(&self.amps, &other.amps, tol)
    }

    /// Amplitudes multiplied by `e^{-i theta}`, with `theta` the phase of the
    /// largest-modulus amplitude, so that amplitude is real and positive.
    pub fn phase_aligned(&self) -> Vec<C64> {
        let k = pivot_index(&self.amps);
        let rot = C64::from_polar(1.0, -self.amps[k].arg());
        self.amps.iter().map(|a| a * rot).collect()
    }
}

/// Parses a string over `{0,1}` into a basis index (first character = qubit 1 = MSB).
pub fn parse_bitstring(bits: &str) -> Result<usize> {
    if bits.is_empty() {
        return Err(Error::InvalidPattern("empty bit string".into()));
    }
    bits.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(Error::InvalidPattern(format!(
            "'{other}' in bit string '{bits}'"
        ))),
    })
}

/// Formats basis index `index` as an `n_qubits`-character bit string.
pub fn format_bits(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| {
            if index >> (n_qubits - 1 - q) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Hermitian density matrix, optionally a traceless deviation matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    deviation: bool,
}

impl DensityMatrix {
    /// Validates a normalized, positive semidefinite density matrix.
    ///
    /// Positivity is checked through a Cholesky-style factorization of
    /// `ρ + 1e-10·I`, which succeeds iff every eigenvalue is above `-1e-10`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::check_hermitian(&matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DEFAULT_TOL || tr.im.abs() > DEFAULT_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        if !is_positive_semidefinite(&matrix, 1e-10) {
            return Err(Error::InvalidState("negative eigenvalue".into()));
        }
        Ok(DensityMatrix {
            matrix,
            deviation: false,
        })
    }

    /// Validates a traceless deviation matrix.
    pub fn deviation(matrix: ComplexMatrix) -> Result<Self> {
        Self::check_hermitian(&matrix)?;
        let tr = matrix.trace();
        if tr.norm() > DEFAULT_TOL {
            return Err(Error::InvalidState(format!(
                "deviation matrix has trace {tr}"
            )));
        }
        Ok(DensityMatrix {
            matrix,
            deviation: true,
        })
    }

    fn check_hermitian(matrix: &ComplexMatrix) -> Result<()> {
        matrix.n_qubits()?;
        if !matrix.is_hermitian(DEFAULT_TOL) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        Ok(())
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        DensityMatrix {
            matrix: ComplexMatrix::from_fn(a.len(), a.len(), |r, c| a[r] * a[c].conj()),
            deviation: false,
        }
    }

    /// Maximally mixed state `I / 2^N`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        DensityMatrix {
            matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
            deviation: false,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn is_deviation(&self) -> bool {
        self.deviation
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::dims(
                format!("{0}x{0}", self.dim()),
                u.shape_string(),
            ));
        }
        let matrix = &(u * &self.matrix) * &u.adjoint();
        Ok(DensityMatrix {
            matrix,
            deviation: self.deviation,
        })
    }

    /// Ideal z-gradient crusher: zeroes every coherence, keeps populations.
    pub fn crush(&self) -> Self {
        DensityMatrix {
            matrix: ComplexMatrix::from_diagonal(&self.matrix.diagonal()),
            deviation: self.deviation,
        }
    }

    /// Real parts of the diagonal.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }
}

fn is_positive_semidefinite(m: &ComplexMatrix, shift: f64) -> bool {
    let n = m.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re + shift;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}

/// `U |ψ>`.
pub fn apply(u: &ComplexMatrix, state: &StateVector) -> Result<StateVector> {
    if !u.is_square() {
        return Err(Error::dims("square operator", u.shape_string()));
    }
    Ok(StateVector {
        amps: u.mul_vec(&state.amps)?,
    })
}

/// `U ρ U†`.
pub fn conjugate(u: &ComplexMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    rho.conjugate(u)
}

pub fn crush(rho: &DensityMatrix) -> DensityMatrix {
    rho.crush()
}

pub fn populations(rho: &DensityMatrix) -> Vec<f64> {
    rho.populations()
}

/// Either representation of a register state.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.n_qubits(),
            QuantumState::Mixed(r) => r.n_qubits(),
        }
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> Result<QuantumState> {
        Ok(match self {
            QuantumState::Pure(s) => QuantumState::Pure(apply(u, s)?),
            QuantumState::Mixed(r) => QuantumState::Mixed(r.conjugate(u)?),
        })
    }

    /// Basis populations: `|a_i|^2` for pure states, the real diagonal otherwise.
    pub fn populations(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure(s) => s.probabilities(),
            QuantumState::Mixed(r) => r.populations(),
        }
    }

    pub fn to_json(&self) -> MatrixJson {
        match self {
            QuantumState::Pure(s) => MatrixJson::from_state(s),
            QuantumState::Mixed(r) => MatrixJson::from_density(r),
        }
    }
}

/// Kind tag of the matrix/state JSON schema.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    State,
    Density,
    Unitary,
}

/// Wire form `{ "n_qubits", "kind", "re", "im" }`, row-major.
///
/// A state vector is written as a single row of `2^N` amplitudes. Density
/// matrices carry `"deviation": true` when traceless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n_qubits: usize,
    pub kind: MatrixKind,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub deviation: bool,
}

impl MatrixJson {
    fn split(rows: usize, cols: usize, data: &[C64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let re = (0..rows)
            .map(|r| {
                data[r * cols..(r + 1) * cols]
                    .iter()
                    .map(|z| z.re)
                    .collect()
            })
            .collect();
        let im = (0..rows)
            .map(|r| {
                data[r * cols..(r + 1) * cols]
                    .iter()
                    .map(|z| z.im)
                    .collect()
            })
            .collect();
        (re, im)
    }

    pub fn from_state(s: &StateVector) -> Self {
        let (re, im) = Self::split(1, s.dim(), s.amplitudes());
        MatrixJson {
            n_qubits: s.n_qubits(),
            kind: MatrixKind::State,
            re,
            im,
            deviation: false,
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let (re, im) = Self::split(m.rows(), m.cols(), m.data());
        MatrixJson {
            n_qubits: rho.n_qubits(),
            kind: MatrixKind::Density,
            re,
            im,
            deviation: rho.is_deviation(),
        }
    }

    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let n_qubits = u.n_qubits()?;
        let (re, im) = Self::split(u.rows(), u.cols(), u.data());
        Ok(MatrixJson {
            n_qubits,
            kind: MatrixKind::Unitary,
            re,
            im,
            deviation: false,
        })
    }

    fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.re.len() != self.im.len() {
            return Err(Error::Json("re and im have different row counts".into()));
        }
        let rows = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| {
                if r.len() != i.len() {
                    return Err(Error::Json("re and im rows differ in length".into()));
                }
                Ok(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)).collect())
            })
            .collect::<Result<Vec<Vec<C64>>>>()?;
        ComplexMatrix::from_rows(rows)
    }

    fn check_qubits(&self, dim: usize) -> Result<()> {
        if qubits_for_dim(dim)? != self.n_qubits {
            return Err(Error::Json(format!(
                "n_qubits {} does not match dimension {dim}",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn to_state(&self) -> Result<QuantumState> {
        let m = self.to_matrix()?;
        match self.kind {
            MatrixKind::State => {
                if m.rows() != 1 {
                    return Err(Error::Json("state must be a single row".into()));
                }
                self.check_qubits(m.cols())?;
                Ok(QuantumState::Pure(StateVector::new(m.data().to_vec())?))
            }
            MatrixKind::Density => {
                self.check_qubits(m.rows())?;
                let rho = if self.deviation {
                    DensityMatrix::deviation(m)?
                } else {
                    DensityMatrix::new(m)?
                };
                Ok(QuantumState::Mixed(rho))
            }
            MatrixKind::Unitary => Err(Error::Json("expected a state, got a unitary".into())),
        }
    }

    pub fn to_unitary(&self) -> Result<ComplexMatrix> {
        if self.kind != MatrixKind::Unitary {
            return Err(Error::Json("expected kind \"unitary\"".into()));
        }
        let m = self.to_matrix()?;
        self.check_qubits(m.rows())?;
        if !m.is_unitary(DEFAULT_TOL) {
            return Err(Error::Json("matrix is not unitary".into()));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn hadamard1() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]])
            .unwrap()
            .scale(c(FRAC_1_SQRT_2, 0.0))
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_hadamards_has_half_entries() {
        let h2 = kron(&hadamard1(), &hadamard1());
        assert_eq!(h2.rows(), 4);
        for z in h2.data() {
            assert!((z.norm() - 0.5).abs() < 1e-15);
            assert!(z.im == 0.0);
        }
        assert!((h2[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!((h2[(1, 1)].re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn kron_z_half_with_one_projector() {
        let zhalf = ComplexMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, -0.5]]).unwrap();
        let p1 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        let g = kron(&zhalf, &p1);
        let expected = ComplexMatrix::from_diagonal(&[ZERO, c(0.5, 0.0), ZERO, c(-0.5, 0.0)]);
        assert_eq!(g, expected);
    }

    #[test]
    fn global_phase_reflexive() {
        let h = hadamard1();
        let m = equal_up_to_global_phase(&h, &h, DEFAULT_TOL).unwrap();
        assert!(m.equal);
        assert_eq!(m.phase, 0.0);
    }

    #[test]
    fn rz_equals_c1_up_to_phase() {
        for &phi in &[0.3, 1.0, -2.2, PI / 2.0] {
            let rz = ComplexMatrix::from_diagonal(&[
                C64::from_polar(1.0, -phi / 2.0),
                C64::from_polar(1.0, phi / 2.0),
            ]);
            let c1 = ComplexMatrix::from_diagonal(&[ONE, C64::from_polar(1.0, phi)]);
            let m = equal_up_to_global_phase(&rz, &c1, DEFAULT_TOL).unwrap();
            assert!(m.equal);
            assert!((m.phase + phi / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn global_phase_rejects_different_matrices() {
        let m = equal_up_to_global_phase(&hadamard1(), &ComplexMatrix::identity(2), 1e-12).unwrap();
        assert!(!m.equal);
    }

    #[test]
    fn global_phase_errors() {
        let z = ComplexMatrix::zeros(2, 2);
        assert!(matches!(
            equal_up_to_global_phase(&z, &z, 1e-12),
            Err(Error::ZeroReference(_))
        ));
        assert!(matches!(
            equal_up_to_global_phase(
                &ComplexMatrix::identity(2),
                &ComplexMatrix::identity(4),
                1e-12
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_identity_and_hadamards() {
        let s = StateVector::from_bits("000").unwrap();
        assert_eq!(apply(&ComplexMatrix::identity(8), &s).unwrap(), s);
        let h3 = kron(&kron(&hadamard1(), &hadamard1()), &hadamard1());
        let out = apply(&h3, &s).unwrap();
        for a in out.amplitudes() {
            assert!((a.re - 0.3535534).abs() < 1e-7);
            assert!((a.re - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        }
        assert!(apply(&ComplexMatrix::identity(4), &s).is_err());
    }

    #[test]
    fn conjugate_ground_state_gives_column_moduli() {
        let u = kron(
            &hadamard1(),
            &ComplexMatrix::from_diagonal(&[ONE, c(0.0, 1.0)]),
        );
        let u = &u * &kron(&ComplexMatrix::identity(2), &hadamard1());
        let rho = DensityMatrix::from_pure(&StateVector::basis(2, 0).unwrap());
        let out = conjugate(&u, &rho).unwrap();
        // independent route: |ψ> = U|0>, populations |ψ_i|^2
        let psi = apply(&u, &StateVector::basis(2, 0).unwrap()).unwrap();
        for (p, q) in out.populations().iter().zip(psi.probabilities()) {
            assert!((p - q).abs() < 1e-15);
        }
        for (i, p) in out.populations().iter().enumerate() {
            assert!((p - u[(i, 0)].norm_sqr()).abs() < 1e-15);
        }
    }

    #[test]
    fn crush_behaviour() {
        let diag = DensityMatrix::deviation(ComplexMatrix::from_diagonal(&[
            c(1.0, 0.0),
            ZERO,
            ZERO,
            c(-1.0, 0.0),
        ]))
        .unwrap();
        assert_eq!(crush(&diag), diag);
        assert!(crush(&diag).is_deviation());
        assert_eq!(populations(&diag), vec![1.0, 0.0, 0.0, -1.0]);

        let plus = StateVector::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let crushed = crush(&DensityMatrix::from_pure(&plus));
        let expected = ComplexMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, 0.5]]).unwrap();
        assert!(crushed.matrix().max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn populations_of_maximally_mixed() {
        for n in 1..=4 {
            let p = DensityMatrix::maximally_mixed(n).populations();
            assert!(p.iter().all(|&x| (x - 0.5f64.powi(n as i32)).abs() < 1e-15));
        }
    }

    #[test]
    fn populations_of_final_grover_projector() {
        // amplitudes (-1,...,11,...,-1)/(8√2) with 11 at |110>
        let s = 8.0 * 2f64.sqrt();
        let amps: Vec<C64> = (0..8)
            .map(|i| c(if i == 6 { 11.0 } else { -1.0 } / s, 0.0))
            .collect();
        let rho = DensityMatrix::from_pure(&StateVector::new(amps).unwrap());
        assert!((rho.populations()[6] - 121.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]).unwrap();
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = ComplexMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(0.0, 0.1)],
            vec![c(0.0, 0.1), c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(DensityMatrix::deviation(ComplexMatrix::identity(2)).is_err());
        let pure = DensityMatrix::from_pure(&StateVector::basis(2, 3).unwrap());
        assert!(DensityMatrix::new(pure.matrix().clone()).is_ok());
    }

    #[test]
    fn bitstrings() {
        assert_eq!(parse_bitstring("110").unwrap(), 6);
        assert_eq!(format_bits(6, 3), "110");
        assert_eq!(format_bits(1, 3), "001");
        assert!(parse_bitstring("1a0").is_err());
        assert!(parse_bitstring("").is_err());
    }

    #[test]
    fn wrap_phase_range() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn json_state_layout() {
        let s = StateVector::from_bits("01").unwrap();
        let j = MatrixJson::from_state(&s);
        assert_eq!(j.re, vec![vec![0.0, 1.0, 0.0, 0.0]]);
        assert_eq!(j.kind, MatrixKind::State);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"kind\":\"state\""));
        assert!(!text.contains("deviation"));
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_state().unwrap(), QuantumState::Pure(s));
    }

    #[test]
    fn json_rejects_inconsistent_qubits() {
        let mut j = MatrixJson::from_unitary(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(j.to_unitary().unwrap(), ComplexMatrix::identity(4));
        j.n_qubits = 3;
        assert!(j.to_unitary().is_err());
        assert!(j.to_state().is_err());
    }
}
