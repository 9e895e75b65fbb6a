//! Pulse-program compilation for the search operators.
//!
//! Translates the preparation rotation, the phase oracle, the source
//! reflection, and the full search iteration into rf/evolution event lists,
//! computes each list's net unitary, and checks it against the abstract
//! operator up to a global phase.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grover::{self, UnitaryMatrix};
use crate::linalg;
use crate::nmr::{JFraction, PulseAxis, PulseEvent, SpinTarget};
use crate::preset::EprCase;

/// Max-norm tolerance for `achieved = phase · target`.
pub const COMPILE_TOL: f64 = 1e-8;

/// An ordered pulse program; events are applied left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub events: Vec<PulseEvent>,
    pub label: String,
}

impl PulseSequence {
    pub fn new(label: impl Into<String>, events: Vec<PulseEvent>) -> Self {
        Self {
            events,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

impl fmt::Display for PulseSequence {
    /// Line-oriented text format, one event per line:
    /// `rf <spins> <axis> <angle_rad>`, `evolve <num>/<den>J`, `grad`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for event in &self.events {
            match event {
                PulseEvent::Rf { spins, axis, angle } => {
                    writeln!(f, "rf {spins} {axis} {angle}")?;
                }
                PulseEvent::Evolve { fraction } => writeln!(f, "evolve {fraction}")?,
                PulseEvent::Gradient => writeln!(f, "grad")?,
            }
        }
        Ok(())
    }
}

/// Result of a global-phase equivalence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatch {
    pub ok: bool,
    /// The extracted unit scalar, absent when the trace overlap vanishes.
    pub phase: Option<Complex64>,
}

/// Check `a = phase · b` for some unit scalar, extracting the phase from the
/// normalized trace overlap `tr(b†a)/|tr(b†a)|`.
pub fn verify_up_to_global_phase(
    a: &UnitaryMatrix,
    b: &UnitaryMatrix,
    tol: f64,
) -> Result<PhaseMatch> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let dim = a.dim() as f64;
    let overlap = linalg::trace(&linalg::dagger(b.as_array()).dot(a.as_array()));
    if overlap.norm() < 1e-12 {
        return Ok(PhaseMatch {
            ok: false,
            phase: None,
        });
    }
    let phase = overlap / overlap.norm();
    let scaled = b.as_array().mapv(|z| z * phase);
    let deviation = linalg::max_abs_diff(a.as_array(), &scaled);
    let ok = deviation < tol && overlap.norm() / dim > 1.0 - tol;
    Ok(PhaseMatch {
        ok,
        phase: Some(phase),
    })
}

/// The unitary of one event; gradient events have none.
pub fn event_unitary(event: &PulseEvent) -> Result<UnitaryMatrix> {
    match *event {
        PulseEvent::Rf { spins, axis, angle } => Ok(crate::nmr::rf_unitary(spins, axis, angle)),
        PulseEvent::Evolve { fraction } => Ok(crate::nmr::evolution_unitary(fraction.jt())),
        PulseEvent::Gradient => Err(Error::NonUnitarySequence),
    }
}

/// Net unitary of a sequence: the ordered product of its event unitaries,
/// later events multiplying on the left.
pub fn sequence_unitary(seq: &PulseSequence) -> Result<UnitaryMatrix> {
    let mut net = UnitaryMatrix::identity(4);
    for event in &seq.events {
        net = event_unitary(event)?.compose(&net)?;
    }
    Ok(net)
}

/// A pulse program together with the operator it realizes.
#[derive(Debug, Clone)]
pub struct CompiledOperator {
    pub sequence: PulseSequence,
    /// The abstract operator the sequence is meant to realize.
    pub target: UnitaryMatrix,
    /// The sequence's actual net unitary.
    pub achieved: UnitaryMatrix,
    /// Unit scalar with `achieved = global_phase · target`.
    pub global_phase: Complex64,
}

fn compiled(
    label: &str,
    events: Vec<PulseEvent>,
    target: UnitaryMatrix,
) -> Result<CompiledOperator> {
    let sequence = PulseSequence::new(label, events);
    let achieved = sequence_unitary(&sequence)?;
    let check = verify_up_to_global_phase(&achieved, &target, COMPILE_TOL)?;
    match check.phase {
        Some(phase) if check.ok => Ok(CompiledOperator {
            sequence,
            target,
            achieved,
            global_phase: phase,
        }),
        _ => {
            let deviation = linalg::max_abs_diff(achieved.as_array(), target.as_array());
            Err(Error::CompilationMismatch {
                deviation,
                tol: COMPILE_TOL,
            })
        }
    }
}

fn rf(spins: SpinTarget, axis: PulseAxis, angle: f64) -> PulseEvent {
    PulseEvent::Rf { spins, axis, angle }
}

fn evolve(num: u32, den: u32) -> PulseEvent {
    PulseEvent::Evolve {
        fraction: JFraction::new(num, den),
    }
}

const ANGLE_MATCH_TOL: f64 = 1e-12;

fn preparation_events(phi1: f64, phi2: f64) -> Result<Vec<PulseEvent>> {
    use std::f64::consts::FRAC_PI_2;
    if (phi2 - FRAC_PI_2).abs() > ANGLE_MATCH_TOL {
        return Err(Error::UnsupportedTarget {
            reason: format!("spin-2 preparation angle must be π/2, got {phi2}"),
        });
    }
    let first = if (phi1 - FRAC_PI_2).abs() <= ANGLE_MATCH_TOL {
        rf(SpinTarget::Spin1, PulseAxis::YPlus, FRAC_PI_2)
    } else if (phi1 + FRAC_PI_2).abs() <= ANGLE_MATCH_TOL {
        rf(SpinTarget::Spin1, PulseAxis::YMinus, FRAC_PI_2)
    } else {
        return Err(Error::UnsupportedTarget {
            reason: format!("spin-1 preparation angle must be ±π/2, got {phi1}"),
        });
    };
    Ok(vec![
        first,
        rf(SpinTarget::Spin2, PulseAxis::YPlus, FRAC_PI_2),
    ])
}

/// Compile the preparation rotation `Y₁(φ₁) Y₂(π/2)`, φ₁ = ±π/2.
pub fn compile_preparation(phi1: f64, phi2: f64) -> Result<CompiledOperator> {
    let events = preparation_events(phi1, phi2)?;
    let target =
        grover::two_spin_rotation(grover::RotationAxis::Y, phi1, grover::RotationAxis::Y, phi2);
    compiled("preparation", events, target)
}

/// The two phase-oracle flavors realizable by the shared refocusing
/// sequence: they differ by the scalar `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseOracleKind {
    /// Outer pair {0, 3} with γ = -π/2.
    I14Minus,
    /// Inner pair {1, 2} with γ = +π/2.
    I23Plus,
}

fn phase_oracle_events() -> Vec<PulseEvent> {
    use std::f64::consts::PI;
    vec![
        evolve(1, 4),
        rf(SpinTarget::Both, PulseAxis::XPlus, PI),
        evolve(1, 4),
        rf(SpinTarget::Both, PulseAxis::XMinus, PI),
    ]
}

/// Compile the phase oracle; both flavors share the same four-event
/// sequence and differ only in the extracted global phase.
pub fn compile_phase_oracle(kind: PhaseOracleKind) -> Result<CompiledOperator> {
    use std::f64::consts::FRAC_PI_2;
    let (label, marked, gamma) = match kind {
        PhaseOracleKind::I14Minus => ("phase-oracle-outer", [0usize, 3], -FRAC_PI_2),
        PhaseOracleKind::I23Plus => ("phase-oracle-inner", [1usize, 2], FRAC_PI_2),
    };
    let marked = grover::MarkedSet::new(4, marked)?;
    let target = grover::phase_oracle(&marked, gamma);
    compiled(label, phase_oracle_events(), target)
}

fn reflection_events(beta: f64) -> Result<Vec<PulseEvent>> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    let (delay, fourth_axis) = if (beta + FRAC_PI_2).abs() <= ANGLE_MATCH_TOL {
        ((1u32, 8u32), PulseAxis::XMinus)
    } else if (beta - FRAC_PI_2).abs() <= ANGLE_MATCH_TOL {
        ((15u32, 8u32), PulseAxis::XPlus)
    } else {
        return Err(Error::UnsupportedTarget {
            reason: format!("source reflection supports β = ±π/2 only, got {beta}"),
        });
    };
    Ok(vec![
        evolve(delay.0, delay.1),
        rf(SpinTarget::Both, PulseAxis::XPlus, PI),
        evolve(delay.0, delay.1),
        rf(SpinTarget::Both, PulseAxis::XMinus, PI),
        rf(SpinTarget::Both, PulseAxis::YMinus, FRAC_PI_2),
        rf(SpinTarget::Both, fourth_axis, FRAC_PI_4),
        rf(SpinTarget::Both, PulseAxis::YPlus, FRAC_PI_2),
    ])
}

/// Compile the source reflection `I_s^β`, β = ±π/2.
pub fn compile_reflection(beta: f64) -> Result<CompiledOperator> {
    let events = reflection_events(beta)?;
    let target = grover::reflection_about_source(0, beta, 4)?;
    compiled("source-reflection", events, target)
}

/// Invert an rf-only event list: reverse the order and flip each rotation
/// axis. Evolution and gradient events have no negative-duration inverse.
fn invert_events(events: &[PulseEvent]) -> Result<Vec<PulseEvent>> {
    events
        .iter()
        .rev()
        .map(|event| match *event {
            PulseEvent::Rf { spins, axis, angle } => {
                let flipped = match axis {
                    PulseAxis::XPlus => PulseAxis::XMinus,
                    PulseAxis::XMinus => PulseAxis::XPlus,
                    PulseAxis::YPlus => PulseAxis::YMinus,
                    PulseAxis::YMinus => PulseAxis::YPlus,
                };
                Ok(rf(spins, flipped, angle))
            }
            _ => Err(Error::UnsupportedTarget {
                reason: "only rf events can be inverted".into(),
            }),
        })
        .collect()
}

/// Compile the whole experiment operator `(-U I_s^β U† I_t^γ) U` for one of
/// the EPR cases: preparation, oracle, inverted preparation, reflection,
/// preparation.
pub fn compile_full_iteration(case: EprCase) -> Result<CompiledOperator> {
    let prep = preparation_events(case.phi1(), case.phi2())?;
    let phases = case.phases();

    // Both phase-oracle flavors share the same event list; the flavor only
    // shows up in the extracted global phase.
    let mut events = prep.clone();
    events.extend(phase_oracle_events());
    events.extend(invert_events(&prep)?);
    events.extend(reflection_events(phases.beta)?);
    events.extend(prep);

    // Abstract target: G · I_t^γ · U.
    let u = case.preparation();
    let g = grover::grover_operator(&u, case.source(), phases.beta)?;
    let oracle = grover::phase_oracle(&case.marked(), phases.gamma);
    let target = g.compose(&oracle)?.compose(&u)?;

    compiled(&format!("iteration-{case}"), events, target)
}
