//! The four EPR synthesis presets.
//!
//! Each case fixes the preparation rotation signs, the matched phase pair,
//! the marked set, and the entangled target the single search iteration
//! lands on.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grover::{
    two_spin_rotation, MarkedSet, PhaseParams, RotationAxis, StateVector, UnitaryMatrix,
};

/// One of the four EPR synthesis experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EprCase {
    /// (|↑↑⟩ + |↓↓⟩)/√2
    Psi1,
    /// (|↑↑⟩ - |↓↓⟩)/√2
    Psi2,
    /// (|↑↓⟩ + |↓↑⟩)/√2
    Psi3,
    /// (|↑↓⟩ - |↓↑⟩)/√2
    Psi4,
}

impl EprCase {
    pub const ALL: [EprCase; 4] = [EprCase::Psi1, EprCase::Psi2, EprCase::Psi3, EprCase::Psi4];

    pub fn label(&self) -> &'static str {
        match self {
            EprCase::Psi1 => "psi1",
            EprCase::Psi2 => "psi2",
            EprCase::Psi3 => "psi3",
            EprCase::Psi4 => "psi4",
        }
    }

    /// Spin-1 preparation angle: +π/2 for the ψ1/ψ3 experiments, -π/2 for
    /// ψ2/ψ4. The spin-2 angle is +π/2 throughout.
    pub fn phi1(&self) -> f64 {
        match self {
            EprCase::Psi1 | EprCase::Psi3 => FRAC_PI_2,
            EprCase::Psi2 | EprCase::Psi4 => -FRAC_PI_2,
        }
    }

    pub fn phi2(&self) -> f64 {
        FRAC_PI_2
    }

    /// The matched phase pair: β = γ = -π/2 for the outer-pair cases,
    /// β = γ = +π/2 for the inner-pair cases.
    pub fn phases(&self) -> PhaseParams {
        match self {
            EprCase::Psi1 | EprCase::Psi2 => PhaseParams::new(-FRAC_PI_2, -FRAC_PI_2),
            EprCase::Psi3 | EprCase::Psi4 => PhaseParams::new(FRAC_PI_2, FRAC_PI_2),
        }
    }

    /// Marked basis states: {0, 3} for ψ1/ψ2, {1, 2} for ψ3/ψ4.
    pub fn marked(&self) -> MarkedSet {
        let members: &[usize] = match self {
            EprCase::Psi1 | EprCase::Psi2 => &[0, 3],
            EprCase::Psi3 | EprCase::Psi4 => &[1, 2],
        };
        MarkedSet::new(4, members.iter().copied()).expect("indices are in range")
    }

    /// Source basis state (|↑↑⟩ throughout).
    pub fn source(&self) -> usize {
        0
    }

    /// The preparation unitary `Y₁(φ₁) Y₂(π/2)`.
    pub fn preparation(&self) -> UnitaryMatrix {
        two_spin_rotation(RotationAxis::Y, self.phi1(), RotationAxis::Y, self.phi2())
    }

    /// The canonical target state, with the overall phase dropped.
    pub fn target_state(&self) -> StateVector {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let amps = match self {
            EprCase::Psi1 => [h, z, z, h],
            EprCase::Psi2 => [h, z, z, -h],
            EprCase::Psi3 => [z, h, h, z],
            EprCase::Psi4 => [z, h, -h, z],
        };
        StateVector::from_slice(&amps).expect("EPR states are normalized")
    }
}

impl FromStr for EprCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psi1" | "ψ1" => Ok(EprCase::Psi1),
            "psi2" | "ψ2" => Ok(EprCase::Psi2),
            "psi3" | "ψ3" => Ok(EprCase::Psi3),
            "psi4" | "ψ4" => Ok(EprCase::Psi4),
            other => Err(Error::InvalidConfig {
                reason: format!("unknown EPR case '{other}' (expected psi1..psi4)"),
            }),
        }
    }
}

impl std::fmt::Display for EprCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}
