//! Generalized Grover search on dense state vectors.
//!
//! Builds the phase oracle, the source reflection, and the composite search
//! operator for an arbitrary preparation unitary, source state, marked set,
//! and phase pair, then iterates by direct matrix-vector application. All
//! operators are materialized as dense matrices; the intended scale is a few
//! qubits.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, expi, CMat, CVec};

/// Max-norm tolerance for the unitarity invariant `U†U = I`.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Tolerance for state normalization.
pub const NORM_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A normalized pure state over `dim` computational basis states.
///
/// Basis convention for two spins: index 0 = |↑↑⟩, 1 = |↑↓⟩, 2 = |↓↑⟩,
/// 3 = |↓↓⟩, with spin 1 as the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVec,
}

impl StateVector {
    /// Wrap an amplitude vector, enforcing unit norm within [`NORM_TOL`].
    pub fn new(amps: CVec) -> Result<Self> {
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let deviation = (norm_sq - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { amps })
    }

    /// Basis state |index⟩ of the given dimension.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut amps = Array1::from_elem(dim, ZERO);
        amps[index] = ONE;
        Ok(Self { amps })
    }

    /// Build from a slice of amplitudes.
    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Self::new(Array1::from_vec(amps.to_vec()))
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    /// Squared overlap |⟨other|self⟩|², insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        let overlap: Complex64 = self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| b.conj() * a)
            .sum();
        overlap.norm_sqr()
    }

    /// Largest entrywise difference to another state (phase-sensitive).
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// The set of marked basis states (the search targets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSet {
    dim: usize,
    members: Vec<usize>,
}

impl MarkedSet {
    /// Build from any iterator of indices; sorts and deduplicates.
    pub fn new(dim: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&index) = members.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        Ok(Self { dim, members })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    /// Marked indices in ascending order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Unmarked indices in ascending order.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.dim).filter(|i| !self.contains(*i)).collect()
    }
}

/// The phase pair (β, γ) of the source reflection and the phase oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub beta: f64,
    pub gamma: f64,
}

impl PhaseParams {
    pub fn new(beta: f64, gamma: f64) -> Self {
        Self { beta, gamma }
    }
}

/// A dense unitary matrix. Construction enforces `U†U = I` within
/// [`UNITARITY_TOL`], so holding a `UnitaryMatrix` is itself the proof of
/// unitarity; operations that demand a unitary input take this type.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    mat: CMat,
}

impl UnitaryMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let deviation = linalg::unitarity_error(&mat);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary {
                deviation,
                tol: UNITARITY_TOL,
            });
        }
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: linalg::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_array(&self) -> &CMat {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    /// Conjugate transpose (the inverse).
    pub fn dagger(&self) -> Self {
        Self {
            mat: linalg::dagger(&self.mat),
        }
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.dim(),
            });
        }
        Self::new(self.mat.dot(&rhs.mat))
    }

    /// Apply to a state, `U|ψ⟩`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        StateVector::new(self.mat.dot(state.amplitudes()))
    }

    /// Scale by a unit-modulus phase factor.
    pub fn scaled(&self, phase: Complex64) -> Result<Self> {
        Self::new(self.mat.mapv(|z| z * phase))
    }
}

/// Rotation axis of a single-spin rf rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationAxis {
    X,
    Y,
}

/// Single-spin rotation `e^{i φ I_a}` as a 2x2 matrix.
fn single_spin_rotation(axis: RotationAxis, phi: f64) -> CMat {
    let c = Complex64::new((phi / 2.0).cos(), 0.0);
    let s = (phi / 2.0).sin();
    match axis {
        // e^{i φ I_x} = cos(φ/2) I + i sin(φ/2) (2 I_x)
        RotationAxis::X => {
            ndarray::array![[c, Complex64::new(0.0, s)], [Complex64::new(0.0, s), c]]
        }
        // e^{i φ I_y} = cos(φ/2) I + i sin(φ/2) (2 I_y)
        RotationAxis::Y => {
            ndarray::array![[c, Complex64::new(s, 0.0)], [Complex64::new(-s, 0.0), c]]
        }
    }
}

/// Phase oracle: diagonal unitary multiplying every marked state by `e^{iγ}`.
pub fn phase_oracle(marked: &MarkedSet, gamma: f64) -> UnitaryMatrix {
    let dim = marked.dim();
    let mut mat = linalg::identity(dim);
    let phase = expi(gamma);
    for &i in marked.members() {
        mat[(i, i)] = phase;
    }
    UnitaryMatrix { mat }
}

/// Source reflection: identity except for phase `e^{iβ}` on |s⟩.
pub fn reflection_about_source(s: usize, beta: f64, dim: usize) -> Result<UnitaryMatrix> {
    if s >= dim {
        return Err(Error::IndexOutOfRange { index: s, dim });
    }
    let mut mat = linalg::identity(dim);
    mat[(s, s)] = expi(beta);
    Ok(UnitaryMatrix { mat })
}

/// Composite search operator `G = -U I_s^β U†`.
pub fn grover_operator(u: &UnitaryMatrix, s: usize, beta: f64) -> Result<UnitaryMatrix> {
    let reflection = reflection_about_source(s, beta, u.dim())?;
    let product = u
        .as_array()
        .dot(reflection.as_array())
        .dot(&linalg::dagger(u.as_array()));
    UnitaryMatrix::new(product.mapv(|z| -z))
}

/// Simultaneous rotations on the two spins, `A_1(φ1) ⊗ A_2(φ2)` with spin 1
/// as the most significant bit.
pub fn two_spin_rotation(
    axis1: RotationAxis,
    phi1: f64,
    axis2: RotationAxis,
    phi2: f64,
) -> UnitaryMatrix {
    let r1 = single_spin_rotation(axis1, phi1);
    let r2 = single_spin_rotation(axis2, phi2);
    UnitaryMatrix {
        mat: ndarray::linalg::kron(&r1, &r2),
    }
}

/// The q-fold tensor power of the 2x2 Hadamard, used by the original-Grover
/// special case.
pub fn walsh_hadamard(qubits: u32) -> UnitaryMatrix {
    let h = ndarray::array![[ONE, ONE], [ONE, Complex64::new(-1.0, 0.0)]]
        .mapv(|z| z / Complex64::new(std::f64::consts::SQRT_2, 0.0));
    let mut mat = Array2::eye(1);
    for _ in 0..qubits {
        mat = ndarray::linalg::kron(&mat, &h);
    }
    UnitaryMatrix { mat }
}

/// Initial state `|g(0)⟩ = U|s⟩`, i.e. column `s` of `U`.
pub fn prepare_initial(u: &UnitaryMatrix, s: usize) -> Result<StateVector> {
    if s >= u.dim() {
        return Err(Error::IndexOutOfRange {
            index: s,
            dim: u.dim(),
        });
    }
    StateVector::new(u.as_array().column(s).to_owned())
}

/// Run `n` search iterations: `(G I_t^γ)^n U|s⟩`.
pub fn run_iterations(
    u: &UnitaryMatrix,
    s: usize,
    marked: &MarkedSet,
    phases: PhaseParams,
    n: u32,
) -> Result<StateVector> {
    if marked.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: marked.dim(),
        });
    }
    let oracle = phase_oracle(marked, phases.gamma);
    let g = grover_operator(u, s, phases.beta)?;
    let step = g.as_array().dot(oracle.as_array());

    let mut state = prepare_initial(u, s)?.amplitudes().to_owned();
    for _ in 0..n {
        state = step.dot(&state);
    }
    StateVector::new(state)
}

/// Probability of measuring any marked state, `Σ_{i∈M} |amps[i]|²`.
pub fn success_probability(state: &StateVector, marked: &MarkedSet) -> Result<f64> {
    if marked.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: marked.dim(),
        });
    }
    Ok(marked
        .members()
        .iter()
        .map(|&i| state.amplitude(i).norm_sqr())
        .sum())
}
