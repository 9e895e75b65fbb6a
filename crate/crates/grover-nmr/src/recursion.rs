//! Closed-form amplitude evolution for the generalized search.
//!
//! The weighted averages of the primed marked/unmarked amplitudes obey a
//! linear two-term recursion driven by a 2x2 transfer matrix that depends
//! only on the phases and on the probability mass the preparation column
//! puts on the marked set. Powers of the transfer matrix are taken through
//! its eigendecomposition, in closed form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grover::{MarkedSet, PhaseParams, StateVector, UnitaryMatrix};
use crate::linalg::expi;

/// Threshold below which a preparation-column entry counts as vanishing.
pub const COLUMN_ENTRY_TOL: f64 = 1e-12;
/// Eigenvalue separation below which the transfer matrix is treated as
/// defective.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Guard on `|det S|` for the eigenvector matrix.
pub const EIGENBASIS_DET_MIN: f64 = 1e-8;
/// `|l̄'(n)|` below this counts as "the unmarked amplitudes vanish".
pub const TARGET_VANISH_TOL: f64 = 1e-9;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Probability mass of the preparation column on the marked set and its
/// complement. The two weights sum to one by unitarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub w_marked: f64,
    pub w_unmarked: f64,
}

/// Split the column-`s` probability mass of `u` across the marked set.
pub fn weights(u: &UnitaryMatrix, s: usize, marked: &MarkedSet) -> Result<Weights> {
    if s >= u.dim() {
        return Err(Error::IndexOutOfRange {
            index: s,
            dim: u.dim(),
        });
    }
    if marked.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: marked.dim(),
        });
    }
    let w_marked: f64 = marked
        .members()
        .iter()
        .map(|&i| u.entry(i, s).norm_sqr())
        .sum();
    let w_unmarked: f64 = marked
        .complement()
        .iter()
        .map(|&i| u.entry(i, s).norm_sqr())
        .sum();
    Ok(Weights {
        w_marked,
        w_unmarked,
    })
}

/// The 2x2 transfer matrix of the averaged recursion together with its
/// eigensystem.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    a: [[Complex64; 2]; 2],
    eigenvalues: (Complex64, Complex64),
    s: [[Complex64; 2]; 2],
    s_inv: [[Complex64; 2]; 2],
}

fn mul2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

impl TransferMatrix {
    /// Entries of the transfer matrix itself.
    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.a
    }

    /// Eigenvalues `(λ₊, λ₋)`, with `λ₊` on the principal square-root branch
    /// of the characteristic polynomial.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        self.eigenvalues
    }

    /// Eigenvector matrix (columns are the `λ₊` and `λ₋` eigenvectors).
    pub fn eigenbasis(&self) -> &[[Complex64; 2]; 2] {
        &self.s
    }

    pub fn eigenbasis_inverse(&self) -> &[[Complex64; 2]; 2] {
        &self.s_inv
    }

    /// `A^n` via eigenvalue powers, `S diag(λ₊ⁿ, λ₋ⁿ) S⁻¹`.
    pub fn power(&self, n: u32) -> [[Complex64; 2]; 2] {
        let (lp, lm) = self.eigenvalues;
        let dp = lp.powu(n);
        let dm = lm.powu(n);
        let d = [
            [dp, Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), dm],
        ];
        mul2(&mul2(&self.s, &d), &self.s_inv)
    }
}

/// Build the transfer matrix for the given phases and weights, including its
/// closed-form eigendecomposition.
pub fn transfer_matrix(phases: PhaseParams, w: Weights) -> Result<TransferMatrix> {
    let eg = expi(phases.gamma);
    let b = ONE - expi(phases.beta);
    let wk = Complex64::new(w.w_marked, 0.0);
    let wl = Complex64::new(w.w_unmarked, 0.0);

    let a = [[eg * b * wk - eg, b * wl], [eg * b * wk, b * wl - ONE]];

    // Closed-form 2x2 eigensystem from the characteristic polynomial.
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let lambda_plus = (tr + disc) / 2.0;
    let lambda_minus = (tr - disc) / 2.0;

    if (lambda_plus - lambda_minus).norm() < DEGENERACY_TOL {
        return Err(Error::DegenerateEigenvalues {
            eigenvalue: lambda_plus,
        });
    }

    let eigenvector = |lambda: Complex64| -> [Complex64; 2] {
        if a[0][1].norm() > COLUMN_ENTRY_TOL {
            [a[0][1], lambda - a[0][0]]
        } else if a[1][0].norm() > COLUMN_ENTRY_TOL {
            [lambda - a[1][1], a[1][0]]
        } else {
            // Diagonal matrix: pick the matching axis.
            if (lambda - a[0][0]).norm() < (lambda - a[1][1]).norm() {
                [ONE, Complex64::new(0.0, 0.0)]
            } else {
                [Complex64::new(0.0, 0.0), ONE]
            }
        }
    };
    let normalize = |v: [Complex64; 2]| -> [Complex64; 2] {
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / norm, v[1] / norm]
    };
    let vp = normalize(eigenvector(lambda_plus));
    let vm = normalize(eigenvector(lambda_minus));

    let s = [[vp[0], vm[0]], [vp[1], vm[1]]];
    let det_s = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if det_s.norm() < EIGENBASIS_DET_MIN {
        return Err(Error::SingularEigenbasis { det: det_s.norm() });
    }
    let s_inv = [
        [s[1][1] / det_s, -s[0][1] / det_s],
        [-s[1][0] / det_s, s[0][0] / det_s],
    ];

    Ok(TransferMatrix {
        a,
        eigenvalues: (lambda_plus, lambda_minus),
        s,
        s_inv,
    })
}

/// Weighted averages `(k̄'(n), l̄'(n)) = Aⁿ (1, 1)ᵀ`.
pub fn averages_at(tm: &TransferMatrix, n: u32) -> (Complex64, Complex64) {
    let an = tm.power(n);
    (an[0][0] + an[0][1], an[1][0] + an[1][1])
}

/// Per-state amplitudes reconstructed from the weighted averages at
/// iteration `n`.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub n: u32,
    /// Marked weighted average `k̄'(n)`.
    pub kbar: Complex64,
    /// Unmarked weighted average `l̄'(n)`.
    pub lbar: Complex64,
    /// Full amplitude vector: `U_{is}·k̄'(n)` on the marked set,
    /// `U_{is}·l̄'(n)` elsewhere.
    pub amplitudes: Vec<Complex64>,
    pub marked: MarkedSet,
}

impl AmplitudeTrajectory {
    /// Amplitude `k_i(n)` of a marked state.
    pub fn marked_amplitude(&self, i: usize) -> Option<Complex64> {
        self.marked.contains(i).then(|| self.amplitudes[i])
    }

    /// Amplitude `l_i(n)` of an unmarked state.
    pub fn unmarked_amplitude(&self, i: usize) -> Option<Complex64> {
        (!self.marked.contains(i) && i < self.amplitudes.len()).then(|| self.amplitudes[i])
    }

    /// The amplitudes as a normalized state.
    pub fn state(&self) -> Result<StateVector> {
        StateVector::from_slice(&self.amplitudes)
    }
}

/// Check that every preparation-column entry is usable, returning the column.
fn preparation_column(u: &UnitaryMatrix, s: usize) -> Result<Vec<Complex64>> {
    if s >= u.dim() {
        return Err(Error::IndexOutOfRange {
            index: s,
            dim: u.dim(),
        });
    }
    let column: Vec<Complex64> = (0..u.dim()).map(|i| u.entry(i, s)).collect();
    for (i, entry) in column.iter().enumerate() {
        if entry.norm() <= COLUMN_ENTRY_TOL {
            return Err(Error::VanishingColumnEntry {
                index: i,
                magnitude: entry.norm(),
                tol: COLUMN_ENTRY_TOL,
            });
        }
    }
    Ok(column)
}

/// Closed-form amplitudes after `n` iterations.
pub fn amplitudes_at(
    u: &UnitaryMatrix,
    s: usize,
    marked: &MarkedSet,
    phases: PhaseParams,
    n: u32,
) -> Result<AmplitudeTrajectory> {
    if marked.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: marked.dim(),
        });
    }
    let column = preparation_column(u, s)?;
    let w = weights(u, s, marked)?;
    let tm = transfer_matrix(phases, w)?;
    let (kbar, lbar) = averages_at(&tm, n);

    let amplitudes: Vec<Complex64> = column
        .iter()
        .enumerate()
        .map(|(i, &u_is)| {
            if marked.contains(i) {
                u_is * kbar
            } else {
                u_is * lbar
            }
        })
        .collect();

    Ok(AmplitudeTrajectory {
        n,
        kbar,
        lbar,
        amplitudes,
        marked: marked.clone(),
    })
}

/// The iteration count at which the unmarked amplitudes vanish, with the
/// resulting target state.
#[derive(Debug, Clone)]
pub struct SolvedTarget {
    pub n0: u32,
    pub target: StateVector,
}

/// Find the smallest `n₀ ∈ [1, n_max]` with `|l̄'(n₀)| < 1e-9`, and the
/// target state `Σ_{i∈M} U_{is} k̄'(n₀) |i⟩` reached there. Absence of such
/// an iteration is a value, not an error.
pub fn find_target_iteration(
    u: &UnitaryMatrix,
    s: usize,
    marked: &MarkedSet,
    phases: PhaseParams,
    n_max: u32,
) -> Result<Option<SolvedTarget>> {
    if marked.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: marked.dim(),
        });
    }
    let column = preparation_column(u, s)?;
    let w = weights(u, s, marked)?;
    let tm = transfer_matrix(phases, w)?;

    for n in 1..=n_max {
        let (kbar, lbar) = averages_at(&tm, n);
        if lbar.norm() < TARGET_VANISH_TOL {
            let amps: Vec<Complex64> = column
                .iter()
                .enumerate()
                .map(|(i, &u_is)| {
                    if marked.contains(i) {
                        u_is * kbar
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let target = StateVector::from_slice(&amps)?;
            return Ok(Some(SolvedTarget { n0: n, target }));
        }
    }
    Ok(None)
}
