//! Ideal two-spin NMR machine in the doubly rotating frame.
//!
//! State is carried as a deviation density matrix (traceless Hermitian 4x4;
//! the identity part is unobservable and dropped). Pulses are instantaneous
//! hard rotations, free evolution keeps only the scalar J-coupling term, and
//! the z-gradient is modeled as a crush of all off-diagonal coherences.

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grover::{two_spin_rotation, RotationAxis, StateVector, UnitaryMatrix};
use crate::linalg::{self, CMat};

/// Tolerance for the Hermitian/traceless deviation-form invariant.
pub const DEVIATION_FORM_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two-spin system parameters. Frequencies enter only as spectrum labels;
/// the gyromagnetic ratio sets the equilibrium polarizations (spin 2 is
/// normalized to 1).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpinSystem {
    /// Spin-1 (carbon) resonance frequency in MHz.
    pub nu1_mhz: f64,
    /// Spin-2 (proton) resonance frequency in MHz.
    pub nu2_mhz: f64,
    /// Scalar coupling constant in Hz.
    pub j_hz: f64,
    /// γ₁/γ₂ ratio of the gyromagnetic ratios.
    pub gamma_ratio: f64,
}

impl SpinSystem {
    pub fn new(nu1_mhz: f64, nu2_mhz: f64, j_hz: f64, gamma_ratio: f64) -> Result<Self> {
        let sys = Self {
            nu1_mhz,
            nu2_mhz,
            j_hz,
            gamma_ratio,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.j_hz) {
            return Err(Error::InvalidSpinSystem {
                reason: format!("j_hz must be positive, got {}", self.j_hz),
            });
        }
        if !(positive(self.gamma_ratio) && self.gamma_ratio < 1.0) {
            return Err(Error::InvalidSpinSystem {
                reason: format!(
                    "gamma_ratio must lie in (0, 1) for the heteronuclear pair, got {}",
                    self.gamma_ratio
                ),
            });
        }
        if !positive(self.nu1_mhz) || !positive(self.nu2_mhz) {
            return Err(Error::InvalidSpinSystem {
                reason: "resonance frequencies must be positive".into(),
            });
        }
        Ok(())
    }
}

impl Default for SpinSystem {
    /// The chloroform C–H system: 125.76 MHz / 500.13 MHz, J = 215 Hz,
    /// γ₁/γ₂ = 0.2514.
    fn default() -> Self {
        Self {
            nu1_mhz: 125.76,
            nu2_mhz: 500.13,
            j_hz: 215.0,
            gamma_ratio: 0.2514,
        }
    }
}

/// Traceless Hermitian 4x4 deviation density matrix in the z-basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationDensityMatrix {
    mat: CMat,
}

impl DeviationDensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != 4 || mat.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: mat.nrows().max(mat.ncols()),
            });
        }
        let herm_dev = linalg::max_abs_diff(&mat, &linalg::dagger(&mat));
        let trace_dev = linalg::trace(&mat).norm();
        let deviation = herm_dev.max(trace_dev);
        if deviation > DEVIATION_FORM_TOL {
            return Err(Error::NotDeviationForm {
                deviation,
                tol: DEVIATION_FORM_TOL,
            });
        }
        Ok(Self { mat })
    }

    pub fn zero() -> Self {
        Self {
            mat: Array2::from_elem((4, 4), ZERO),
        }
    }

    pub fn as_array(&self) -> &CMat {
        &self.mat
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    /// Conjugation `R ρ R†` by a unitary.
    pub fn conjugated_by(&self, r: &UnitaryMatrix) -> Self {
        let mat = r
            .as_array()
            .dot(&self.mat)
            .dot(&linalg::dagger(r.as_array()));
        // Unitary conjugation preserves the deviation form exactly;
        // symmetrize away the last-bit float noise.
        let sym = (&mat + &linalg::dagger(&mat)).mapv(|z| z * 0.5);
        Self { mat: sym }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mat: self.mat.mapv(|z| z * factor),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.mat, &other.mat)
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.mat)
    }
}

/// Which spins an rf pulse addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinTarget {
    Spin1,
    Spin2,
    Both,
}

impl fmt::Display for SpinTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinTarget::Spin1 => write!(f, "1"),
            SpinTarget::Spin2 => write!(f, "2"),
            SpinTarget::Both => write!(f, "12"),
        }
    }
}

/// Rotation axis of an rf pulse, including the sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseAxis {
    XPlus,
    XMinus,
    YPlus,
    YMinus,
}

impl PulseAxis {
    fn decompose(self) -> (RotationAxis, f64) {
        match self {
            PulseAxis::XPlus => (RotationAxis::X, 1.0),
            PulseAxis::XMinus => (RotationAxis::X, -1.0),
            PulseAxis::YPlus => (RotationAxis::Y, 1.0),
            PulseAxis::YMinus => (RotationAxis::Y, -1.0),
        }
    }
}

impl fmt::Display for PulseAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseAxis::XPlus => write!(f, "+x"),
            PulseAxis::XMinus => write!(f, "-x"),
            PulseAxis::YPlus => write!(f, "+y"),
            PulseAxis::YMinus => write!(f, "-y"),
        }
    }
}

/// A duration expressed as a rational multiple of 1/J.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JFraction {
    num: u32,
    den: u32,
}

impl JFraction {
    pub fn new(num: u32, den: u32) -> Self {
        assert!(den > 0, "J-fraction denominator must be positive");
        Self { num, den }
    }

    /// The dimensionless product J·t.
    pub fn jt(&self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }
}

impl fmt::Display for JFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}J", self.num, self.den)
    }
}

/// One event of a pulse program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseEvent {
    /// Instantaneous hard rotation `e^{i·angle·(±I_axis)}` on the addressed
    /// spins.
    Rf {
        spins: SpinTarget,
        axis: PulseAxis,
        angle: f64,
    },
    /// Free evolution under the J coupling for `fraction` of 1/J.
    Evolve { fraction: JFraction },
    /// z-gradient crush of all off-diagonal coherences.
    Gradient,
}

/// The unitary of an rf rotation event.
pub fn rf_unitary(spins: SpinTarget, axis: PulseAxis, angle: f64) -> UnitaryMatrix {
    let (rot_axis, sign) = axis.decompose();
    let phi = sign * angle;
    match spins {
        SpinTarget::Spin1 => two_spin_rotation(rot_axis, phi, rot_axis, 0.0),
        SpinTarget::Spin2 => two_spin_rotation(rot_axis, 0.0, rot_axis, phi),
        SpinTarget::Both => two_spin_rotation(rot_axis, phi, rot_axis, phi),
    }
}

/// The unitary of free evolution under `e^{-i 2πJt I_z¹I_z²}` for the
/// dimensionless product `jt = J·t`.
pub fn evolution_unitary(jt: f64) -> UnitaryMatrix {
    let outer = linalg::expi(-std::f64::consts::PI * jt / 2.0);
    let inner = linalg::expi(std::f64::consts::PI * jt / 2.0);
    let mut mat = linalg::identity(4);
    mat[(0, 0)] = outer;
    mat[(1, 1)] = inner;
    mat[(2, 2)] = inner;
    mat[(3, 3)] = outer;
    UnitaryMatrix::new(mat).expect("diagonal phases are unitary")
}

/// Equilibrium deviation matrix `γ₁ I_z¹ + γ₂ I_z²` with γ₂ normalized to 1.
pub fn equilibrium(sys: &SpinSystem) -> DeviationDensityMatrix {
    let g = sys.gamma_ratio;
    let mut mat = Array2::from_elem((4, 4), ZERO);
    // I_z¹ = diag(1,1,-1,-1)/2, I_z² = diag(1,-1,1,-1)/2.
    let diag = [0.5 * g + 0.5, 0.5 * g - 0.5, -0.5 * g + 0.5, -0.5 * g - 0.5];
    for (i, v) in diag.into_iter().enumerate() {
        mat[(i, i)] = Complex64::new(v, 0.0);
    }
    DeviationDensityMatrix { mat }
}

/// Apply a hard rf rotation.
pub fn apply_rf(
    rho: &DeviationDensityMatrix,
    spins: SpinTarget,
    axis: PulseAxis,
    angle: f64,
) -> DeviationDensityMatrix {
    rho.conjugated_by(&rf_unitary(spins, axis, angle))
}

/// Free evolution for `t` seconds under the coupling `j_hz`.
pub fn free_evolution(
    rho: &DeviationDensityMatrix,
    t_seconds: f64,
    j_hz: f64,
) -> DeviationDensityMatrix {
    rho.conjugated_by(&evolution_unitary(j_hz * t_seconds))
}

/// Free evolution for a rational multiple of 1/J.
pub fn free_evolution_fraction(
    rho: &DeviationDensityMatrix,
    fraction: JFraction,
) -> DeviationDensityMatrix {
    rho.conjugated_by(&evolution_unitary(fraction.jt()))
}

/// Idealized z-gradient: zero every off-diagonal element.
pub fn gradient_crush(rho: &DeviationDensityMatrix) -> DeviationDensityMatrix {
    let mut mat = Array2::from_elem((4, 4), ZERO);
    for i in 0..4 {
        mat[(i, i)] = Complex64::new(rho.mat[(i, i)].re, 0.0);
    }
    DeviationDensityMatrix { mat }
}

/// Apply a single pulse-program event.
pub fn apply_event(rho: &DeviationDensityMatrix, event: &PulseEvent) -> DeviationDensityMatrix {
    match *event {
        PulseEvent::Rf { spins, axis, angle } => apply_rf(rho, spins, axis, angle),
        PulseEvent::Evolve { fraction } => free_evolution_fraction(rho, fraction),
        PulseEvent::Gradient => gradient_crush(rho),
    }
}

/// Apply events left to right.
pub fn apply_events(rho: &DeviationDensityMatrix, events: &[PulseEvent]) -> DeviationDensityMatrix {
    events
        .iter()
        .fold(rho.clone(), |acc, ev| apply_event(&acc, ev))
}

/// Initial spin-2 flip angle `arccos(γ₁/2γ₂)` of the pseudo-pure
/// preparation.
pub fn prep_flip_angle(gamma_ratio: f64) -> Result<f64> {
    if !(gamma_ratio > 0.0 && gamma_ratio < 2.0) {
        return Err(Error::FlipAngleUndefined { value: gamma_ratio });
    }
    Ok((gamma_ratio / 2.0).acos())
}

/// The spatial-averaging preparation sequence, from the equilibrium state to
/// the pseudo-pure |↑↑⟩ deviation matrix (proportional to
/// diag(3,-1,-1,-1)/4).
pub fn pseudo_pure_sequence(sys: &SpinSystem) -> Result<Vec<PulseEvent>> {
    use std::f64::consts::{FRAC_PI_4, PI};
    let alpha = prep_flip_angle(sys.gamma_ratio)?;
    Ok(vec![
        PulseEvent::Rf {
            spins: SpinTarget::Spin2,
            axis: PulseAxis::XPlus,
            angle: alpha,
        },
        PulseEvent::Gradient,
        PulseEvent::Rf {
            spins: SpinTarget::Spin1,
            axis: PulseAxis::XPlus,
            angle: FRAC_PI_4,
        },
        PulseEvent::Evolve {
            fraction: JFraction::new(1, 4),
        },
        PulseEvent::Rf {
            spins: SpinTarget::Both,
            axis: PulseAxis::XPlus,
            angle: PI,
        },
        PulseEvent::Evolve {
            fraction: JFraction::new(1, 4),
        },
        PulseEvent::Rf {
            spins: SpinTarget::Both,
            axis: PulseAxis::XMinus,
            angle: PI,
        },
        PulseEvent::Rf {
            spins: SpinTarget::Spin1,
            axis: PulseAxis::YMinus,
            angle: FRAC_PI_4,
        },
        PulseEvent::Gradient,
    ])
}

/// Run the spatial-averaging preparation from equilibrium.
pub fn prepare_pseudo_pure(sys: &SpinSystem) -> Result<DeviationDensityMatrix> {
    let events = pseudo_pure_sequence(sys)?;
    Ok(apply_events(&equilibrium(sys), &events))
}

/// Fidelity `⟨target| ρ_pure |target⟩` of the pure part of a deviation
/// matrix, where `ρ_pure = (ρ - λ_min I) / tr(ρ - λ_min I)` is the
/// positive-semidefinite completion with minimal trace.
pub fn to_pure_state_check(rho: &DeviationDensityMatrix, target: &StateVector) -> Result<f64> {
    if target.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: target.dim(),
        });
    }
    let eigs = rho.eigenvalues();
    let lambda_min = eigs[0];
    // A traceless Hermitian matrix with no negative eigenvalue is zero.
    if lambda_min > -1e-12 {
        return Err(Error::NoPurePart {
            reason: format!(
                "deviation matrix has smallest eigenvalue {lambda_min:.3e}; nothing to normalize"
            ),
        });
    }
    let mut expectation = Complex64::new(0.0, 0.0);
    for r in 0..4 {
        for c in 0..4 {
            expectation += target.amplitude(r).conj() * rho.mat[(r, c)] * target.amplitude(c);
        }
    }
    let fidelity = (expectation.re - lambda_min) / (-4.0 * lambda_min);
    Ok(fidelity.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// The deviation matrix of the outer-pair EPR state,
    /// |ψ₁⟩⟨ψ₁| - I/4, written out entrywise.
    pub(crate) fn epr_outer_deviation() -> DeviationDensityMatrix {
        DeviationDensityMatrix::new(array![
            [c(0.25, 0.0), ZERO, ZERO, c(0.5, 0.0)],
            [ZERO, c(-0.25, 0.0), ZERO, ZERO],
            [ZERO, ZERO, c(-0.25, 0.0), ZERO],
            [c(0.5, 0.0), ZERO, ZERO, c(0.25, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn equilibrium_with_equal_gammas() {
        let sys = SpinSystem {
            gamma_ratio: 0.999_999_999_999_9,
            ..SpinSystem::default()
        };
        // In the γ₁ = γ₂ limit the equilibrium tends to diag(1, 0, 0, -1).
        let rho = equilibrium(&SpinSystem {
            gamma_ratio: 1.0 - 1e-15,
            ..sys
        });
        let expected = [1.0, 0.0, 0.0, -1.0];
        for (i, want) in expected.into_iter().enumerate() {
            assert!((rho.element(i, i).re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn equilibrium_for_the_chloroform_ratio() {
        let rho = equilibrium(&SpinSystem::default());
        let expected = [0.6257, -0.3743, 0.3743, -0.6257];
        for (i, want) in expected.into_iter().enumerate() {
            assert!(
                (rho.element(i, i).re - want).abs() < 1e-12,
                "diag {i}: got {}",
                rho.element(i, i).re
            );
        }
        // Diagonal and traceless.
        for r in 0..4 {
            for cidx in 0..4 {
                if r != cidx {
                    assert_eq!(rho.element(r, cidx), ZERO);
                }
            }
        }
        assert!(linalg::trace(rho.as_array()).norm() < 1e-15);
    }

    #[test]
    fn readout_pulse_turns_epr_deviation_into_observable_form() {
        // [π/2]_y on spin 2 converts the double-quantum coherence into the
        // single-quantum pattern with entries ±1/4 everywhere off-diagonal.
        let rho = epr_outer_deviation();
        let rotated = apply_rf(&rho, SpinTarget::Spin2, PulseAxis::YPlus, FRAC_PI_2);
        let expected = array![
            [ZERO, c(-0.25, 0.0), c(0.25, 0.0), c(0.25, 0.0)],
            [c(-0.25, 0.0), ZERO, c(-0.25, 0.0), c(-0.25, 0.0)],
            [c(0.25, 0.0), c(-0.25, 0.0), ZERO, c(0.25, 0.0)],
            [c(0.25, 0.0), c(-0.25, 0.0), c(0.25, 0.0), ZERO],
        ];
        assert!(
            linalg::max_abs_diff(rotated.as_array(), &expected) < 1e-14,
            "got {:?}",
            rotated.as_array()
        );
    }

    #[test]
    fn zero_angle_pulse_is_identity() {
        let rho = epr_outer_deviation();
        let same = apply_rf(&rho, SpinTarget::Both, PulseAxis::XPlus, 0.0);
        assert!(rho.max_abs_diff(&same) < 1e-15);
    }

    #[test]
    fn opposite_pi_pulses_cancel() {
        let rho = apply_rf(
            &equilibrium(&SpinSystem::default()),
            SpinTarget::Spin1,
            PulseAxis::XPlus,
            0.7,
        );
        let there = apply_rf(&rho, SpinTarget::Both, PulseAxis::XPlus, PI);
        let back = apply_rf(&there, SpinTarget::Both, PulseAxis::XMinus, PI);
        assert!(rho.max_abs_diff(&back) < 1e-14);
    }

    #[test]
    fn free_evolution_phases_match_the_coupling_eigenvalues() {
        let u = evolution_unitary(0.5);
        let quarter = std::f64::consts::FRAC_PI_4;
        let expected = [
            linalg::expi(-quarter),
            linalg::expi(quarter),
            linalg::expi(quarter),
            linalg::expi(-quarter),
        ];
        for (i, want) in expected.into_iter().enumerate() {
            assert!((u.entry(i, i) - want).norm() < 1e-15);
        }
    }

    #[test]
    fn free_evolution_zero_time_is_identity() {
        let rho = epr_outer_deviation();
        let same = free_evolution(&rho, 0.0, 215.0);
        assert!(rho.max_abs_diff(&same) < 1e-15);
    }

    #[test]
    fn seconds_and_fraction_forms_agree() {
        let j = 215.0;
        let rho = apply_rf(
            &equilibrium(&SpinSystem::default()),
            SpinTarget::Both,
            PulseAxis::XPlus,
            1.1,
        );
        let by_seconds = free_evolution(&rho, 1.0 / (2.0 * j), j);
        let by_fraction = free_evolution_fraction(&rho, JFraction::new(1, 2));
        assert!(by_seconds.max_abs_diff(&by_fraction) < 1e-14);
    }

    #[test]
    fn diagonal_matrices_are_fixed_by_free_evolution() {
        let rho = equilibrium(&SpinSystem::default());
        let evolved = free_evolution_fraction(&rho, JFraction::new(7, 3));
        assert!(rho.max_abs_diff(&evolved) < 1e-14);
    }

    #[test]
    fn gradient_keeps_the_diagonal_and_is_idempotent() {
        let rho = epr_outer_deviation();
        let crushed = gradient_crush(&rho);
        let expected = [0.25, -0.25, -0.25, 0.25];
        for (i, want) in expected.into_iter().enumerate() {
            assert!((crushed.element(i, i).re - want).abs() < 1e-15);
        }
        for r in 0..4 {
            for cidx in 0..4 {
                if r != cidx {
                    assert_eq!(crushed.element(r, cidx), ZERO);
                }
            }
        }
        let twice = gradient_crush(&crushed);
        assert!(crushed.max_abs_diff(&twice) < 1e-15);

        let diagonal = equilibrium(&SpinSystem::default());
        assert!(diagonal.max_abs_diff(&gradient_crush(&diagonal)) < 1e-15);
    }

    #[test]
    fn flip_angle_matches_the_equal_gamma_case() {
        assert!((prep_flip_angle(1.0).unwrap() - PI / 3.0).abs() < 1e-15);
        assert!(prep_flip_angle(0.0).is_err());
        assert!(prep_flip_angle(2.0).is_err());
        assert!(prep_flip_angle(-0.3).is_err());
    }

    #[test]
    fn pseudo_pure_preparation_reaches_the_target_form() {
        let sys = SpinSystem::default();
        let rho = prepare_pseudo_pure(&sys).unwrap();

        // Proportional to diag(3, -1, -1, -1)/4 with factor γ₁.
        let g = sys.gamma_ratio;
        let expected = [0.75 * g, -0.25 * g, -0.25 * g, -0.25 * g];
        for (i, want) in expected.into_iter().enumerate() {
            assert!(
                (rho.element(i, i).re - want).abs() < 1e-12,
                "diag {i}: got {}, want {want}",
                rho.element(i, i).re
            );
        }
        for r in 0..4 {
            for cidx in 0..4 {
                if r != cidx {
                    assert!(rho.element(r, cidx).norm() < 1e-15, "off-diag ({r},{cidx})");
                }
            }
        }
    }

    #[test]
    fn refocusing_pair_equals_half_inverse_j_evolution() {
        // 1/4J - [π]_x^{1,2} - 1/4J - [-π]_x^{1,2} acts as [1/2J].
        let start = apply_rf(
            &equilibrium(&SpinSystem::default()),
            SpinTarget::Both,
            PulseAxis::YPlus,
            0.9,
        );
        let events = [
            PulseEvent::Evolve {
                fraction: JFraction::new(1, 4),
            },
            PulseEvent::Rf {
                spins: SpinTarget::Both,
                axis: PulseAxis::XPlus,
                angle: PI,
            },
            PulseEvent::Evolve {
                fraction: JFraction::new(1, 4),
            },
            PulseEvent::Rf {
                spins: SpinTarget::Both,
                axis: PulseAxis::XMinus,
                angle: PI,
            },
        ];
        let refocused = apply_events(&start, &events);
        let direct = free_evolution_fraction(&start, JFraction::new(1, 2));
        assert!(refocused.max_abs_diff(&direct) < 1e-10);
    }

    #[test]
    fn pure_part_of_the_epr_deviation_matches_the_state() {
        let inv = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let target = StateVector::from_slice(&[inv, ZERO, ZERO, inv]).unwrap();
        let fid = to_pure_state_check(&epr_outer_deviation(), &target).unwrap();
        assert!((fid - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_part_of_the_pseudo_pure_state_is_the_ground_basis_state() {
        let rho = prepare_pseudo_pure(&SpinSystem::default()).unwrap();
        let fid = to_pure_state_check(&rho, &StateVector::basis(4, 0).unwrap()).unwrap();
        assert!((fid - 1.0).abs() < 1e-10);

        let orthogonal = to_pure_state_check(&rho, &StateVector::basis(4, 1).unwrap()).unwrap();
        assert!(orthogonal.abs() < 1e-10);
    }

    #[test]
    fn pure_part_check_rejects_zero_matrix() {
        let zero = DeviationDensityMatrix::zero();
        let target = StateVector::basis(4, 0).unwrap();
        assert!(matches!(
            to_pure_state_check(&zero, &target),
            Err(Error::NoPurePart { .. })
        ));
    }

    #[test]
    fn deviation_form_is_validated() {
        let mut bad = Array2::from_elem((4, 4), ZERO);
        bad[(0, 0)] = c(1.0, 0.0); // non-traceless
        assert!(matches!(
            DeviationDensityMatrix::new(bad),
            Err(Error::NotDeviationForm { .. })
        ));

        let mut non_hermitian = Array2::from_elem((4, 4), ZERO);
        non_hermitian[(0, 1)] = c(1.0, 0.0);
        non_hermitian[(0, 0)] = c(0.5, 0.0);
        non_hermitian[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(
            DeviationDensityMatrix::new(non_hermitian),
            Err(Error::NotDeviationForm { .. })
        ));
    }

    #[test]
    fn unitary_events_preserve_the_eigenvalue_multiset() {
        let rho = epr_outer_deviation();
        let before = rho.eigenvalues();
        let after = apply_events(
            &rho,
            &[
                PulseEvent::Rf {
                    spins: SpinTarget::Spin1,
                    axis: PulseAxis::YMinus,
                    angle: 1.23,
                },
                PulseEvent::Evolve {
                    fraction: JFraction::new(3, 8),
                },
            ],
        )
        .eigenvalues();
        for (b, a) in before.iter().zip(after.iter()) {
            assert!((b - a).abs() < 1e-10);
        }
    }
}
