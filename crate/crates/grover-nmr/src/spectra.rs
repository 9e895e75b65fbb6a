//! Readout pulses, peak extraction, reference calibration, stick spectra,
//! and EPR-state classification.
//!
//! The observables are the four single-quantum matrix elements of the
//! post-readout deviation matrix: (0,2) and (1,3) appear in the carbon
//! spectrum, (0,1) and (2,3) in the proton spectrum. A reference experiment
//! on the pseudo-pure state fixes the spectrometer phase per nucleus;
//! calibrated elements that are real and negative correspond to positive
//! absorption peaks.

use std::fmt;

use ndarray::array;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::nmr::{
    apply_rf, prepare_pseudo_pure, DeviationDensityMatrix, PulseAxis, SpinSystem, SpinTarget,
};
use crate::preset::EprCase;

/// Magnitudes below this floor count as unobservable.
pub const OBSERVABLE_FLOOR: f64 = 1e-12;
/// Relative tolerance of the classification match on the normalized
/// element quadruple.
pub const CLASSIFY_TOL: f64 = 0.1;

/// Which nucleus a spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nucleus {
    Carbon,
    Proton,
}

impl fmt::Display for Nucleus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nucleus::Carbon => write!(f, "carbon"),
            Nucleus::Proton => write!(f, "proton"),
        }
    }
}

impl Nucleus {
    /// Resonance frequency in Hz.
    pub fn resonance_hz(&self, sys: &SpinSystem) -> f64 {
        match self {
            Nucleus::Carbon => sys.nu1_mhz * 1e6,
            Nucleus::Proton => sys.nu2_mhz * 1e6,
        }
    }

    /// The two single-quantum elements this nucleus reports, each with its
    /// frequency-offset sign.
    fn observable_elements(&self) -> [((usize, usize), f64); 2] {
        match self {
            Nucleus::Carbon => [((0, 2), 1.0), ((1, 3), -1.0)],
            Nucleus::Proton => [((0, 1), 1.0), ((2, 3), -1.0)],
        }
    }
}

/// The spin-selective [π/2]_y readout pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutPulse {
    /// [π/2]_y on spin 1 (carbon).
    Spin1,
    /// [π/2]_y on spin 2 (proton).
    Spin2,
}

/// Apply a readout pulse to a deviation matrix.
pub fn apply_readout(rho: &DeviationDensityMatrix, pulse: ReadoutPulse) -> DeviationDensityMatrix {
    let spins = match pulse {
        ReadoutPulse::Spin1 => SpinTarget::Spin1,
        ReadoutPulse::Spin2 => SpinTarget::Spin2,
    };
    apply_rf(rho, spins, PulseAxis::YPlus, std::f64::consts::FRAC_PI_2)
}

/// Per-nucleus unit scalars fixing the spectrometer phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePhase {
    pub carbon_phase: Complex64,
    pub proton_phase: Complex64,
}

impl ReferencePhase {
    /// The identity calibration (raw elements reported as-is).
    pub fn neutral() -> Self {
        Self {
            carbon_phase: Complex64::new(1.0, 0.0),
            proton_phase: Complex64::new(1.0, 0.0),
        }
    }

    pub fn for_nucleus(&self, nucleus: Nucleus) -> Complex64 {
        match nucleus {
            Nucleus::Carbon => self.carbon_phase,
            Nucleus::Proton => self.proton_phase,
        }
    }
}

/// The unit scalar that turns `element` into a real, negative number (the
/// positive-absorption convention for reference peaks).
pub fn calibration_phase(element: Complex64) -> Result<Complex64> {
    let magnitude = element.norm();
    if magnitude < OBSERVABLE_FLOOR {
        return Err(Error::CalibrationImpossible { magnitude });
    }
    Ok(-element.conj() / magnitude)
}

/// Run the reference experiments (pseudo-pure state plus one readout pulse
/// per nucleus) and record the phase that makes each nucleus's single
/// observable element real and negative.
pub fn calibrate_reference(sys: &SpinSystem) -> Result<ReferencePhase> {
    let pseudo_pure = prepare_pseudo_pure(sys)?;
    let carbon_readout = apply_readout(&pseudo_pure, ReadoutPulse::Spin1);
    let proton_readout = apply_readout(&pseudo_pure, ReadoutPulse::Spin2);
    Ok(ReferencePhase {
        carbon_phase: calibration_phase(carbon_readout.element(0, 2))?,
        proton_phase: calibration_phase(proton_readout.element(0, 1))?,
    })
}

/// One stick of a predicted spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub nucleus: Nucleus,
    /// The reported matrix element (row, col), zero-based.
    pub element: (usize, usize),
    /// Offset from the nucleus resonance, ±J/2 in Hz.
    pub frequency_offset_hz: f64,
    /// Calibrated complex amplitude, arbitrary units.
    pub amplitude: Complex64,
}

impl Peak {
    pub fn magnitude(&self) -> f64 {
        self.amplitude.norm()
    }

    /// Argument of the calibrated amplitude in degrees; undefined below the
    /// observability floor.
    pub fn phase_deg(&self) -> Option<f64> {
        (self.magnitude() > OBSERVABLE_FLOOR).then(|| self.amplitude.arg().to_degrees())
    }
}

/// Read the two peaks of one nucleus off a post-readout deviation matrix.
pub fn extract_peaks(
    rho_r: &DeviationDensityMatrix,
    nucleus: Nucleus,
    reference: &ReferencePhase,
    sys: &SpinSystem,
) -> Vec<Peak> {
    let phase = reference.for_nucleus(nucleus);
    nucleus
        .observable_elements()
        .into_iter()
        .map(|((row, col), offset_sign)| Peak {
            nucleus,
            element: (row, col),
            frequency_offset_hz: offset_sign * sys.j_hz / 2.0,
            amplitude: phase * rho_r.element(row, col),
        })
        .collect()
}

/// The four raw single-quantum observables ((0,2), (1,3), (0,1), (2,3)) of a
/// deviation matrix, without any readout pulse or calibration.
pub fn observable_elements(rho: &DeviationDensityMatrix) -> [Complex64; 4] {
    [
        rho.element(0, 2),
        rho.element(1, 3),
        rho.element(0, 1),
        rho.element(2, 3),
    ]
}

/// The post-readout deviation matrix each EPR case ideally produces under
/// the spin-2 readout pulse, at unit deviation scale.
pub fn ideal_readout_matrix(case: EprCase) -> DeviationDensityMatrix {
    let signs: [[f64; 4]; 4] = match case {
        EprCase::Psi1 => [
            [0.0, -1.0, 1.0, 1.0],
            [-1.0, 0.0, -1.0, -1.0],
            [1.0, -1.0, 0.0, 1.0],
            [1.0, -1.0, 1.0, 0.0],
        ],
        EprCase::Psi2 => [
            [0.0, -1.0, -1.0, -1.0],
            [-1.0, 0.0, 1.0, 1.0],
            [-1.0, 1.0, 0.0, 1.0],
            [-1.0, 1.0, 1.0, 0.0],
        ],
        EprCase::Psi3 => [
            [0.0, 1.0, 1.0, -1.0],
            [1.0, 0.0, 1.0, -1.0],
            [1.0, 1.0, 0.0, -1.0],
            [-1.0, -1.0, -1.0, 0.0],
        ],
        EprCase::Psi4 => [
            [0.0, 1.0, -1.0, 1.0],
            [1.0, 0.0, -1.0, 1.0],
            [-1.0, -1.0, 0.0, -1.0],
            [1.0, 1.0, -1.0, 0.0],
        ],
    };
    let mat: CMat = CMat::from_shape_fn((4, 4), |(r, c)| Complex64::new(signs[r][c] / 4.0, 0.0));
    DeviationDensityMatrix::new(mat).expect("readout matrices are Hermitian and traceless")
}

/// Ideal post-readout matrix of the pseudo-pure reference experiment for
/// each nucleus, at unit deviation scale.
pub fn ideal_reference_readout(nucleus: Nucleus) -> DeviationDensityMatrix {
    let z = Complex64::new(0.0, 0.0);
    let q = |v: f64| Complex64::new(v / 4.0, 0.0);
    let mat = match nucleus {
        Nucleus::Carbon => array![
            [q(1.0), z, q(-2.0), z],
            [z, q(-1.0), z, z],
            [q(-2.0), z, q(1.0), z],
            [z, z, z, q(-1.0)],
        ],
        Nucleus::Proton => array![
            [q(1.0), q(-2.0), z, z],
            [q(-2.0), q(1.0), z, z],
            [z, z, q(-1.0), z],
            [z, z, z, q(-1.0)],
        ],
    };
    DeviationDensityMatrix::new(mat).expect("reference matrices are Hermitian and traceless")
}

/// Signs of the calibrated element quadruple ((0,2), (1,3), (0,1), (2,3))
/// that identify a case, read off [`ideal_readout_matrix`].
fn classification_pattern(case: EprCase) -> [f64; 4] {
    let m = ideal_readout_matrix(case);
    observable_elements(&m).map(|z| (4.0 * z.re).round())
}

/// Match the calibrated peaks against the four readout sign patterns.
/// Returns `None` when nothing matches within [`CLASSIFY_TOL`].
pub fn classify_epr(carbon_peaks: &[Peak], proton_peaks: &[Peak]) -> Option<EprCase> {
    let pick = |peaks: &[Peak], element: (usize, usize)| -> Complex64 {
        peaks
            .iter()
            .find(|p| p.element == element)
            .map(|p| p.amplitude)
            .unwrap_or(Complex64::new(0.0, 0.0))
    };
    let quad = [
        pick(carbon_peaks, (0, 2)),
        pick(carbon_peaks, (1, 3)),
        pick(proton_peaks, (0, 1)),
        pick(proton_peaks, (2, 3)),
    ];
    let max_mag = quad.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max_mag < OBSERVABLE_FLOOR {
        return None;
    }
    let normalized = quad.map(|z| z / max_mag);
    EprCase::ALL.into_iter().find(|&case| {
        let pattern = classification_pattern(case);
        normalized
            .iter()
            .zip(pattern)
            .all(|(z, p)| (z - Complex64::new(p, 0.0)).norm() <= CLASSIFY_TOL)
    })
}

/// Serializable stick-spectrum record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub nucleus: String,
    pub peaks: Vec<PeakRecord>,
}

/// One serialized peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub freq_hz: f64,
    pub magnitude: f64,
    pub phase_deg: f64,
    pub element: [usize; 2],
}

/// Turn calibrated peaks into a serializable record with absolute
/// frequencies. Zero-amplitude peaks are kept with magnitude 0 and phase 0.
pub fn emit_spectrum(nucleus: Nucleus, peaks: &[Peak], sys: &SpinSystem) -> SpectrumRecord {
    let base = nucleus.resonance_hz(sys);
    SpectrumRecord {
        nucleus: nucleus.to_string(),
        peaks: peaks
            .iter()
            .map(|p| PeakRecord {
                freq_hz: base + p.frequency_offset_hz,
                magnitude: p.magnitude(),
                phase_deg: p.phase_deg().unwrap_or(0.0),
                element: [p.element.0, p.element.1],
            })
            .collect(),
    }
}

/// JSON for a list of spectrum records.
pub fn records_to_json(records: &[SpectrumRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

pub fn records_from_json(text: &str) -> Result<Vec<SpectrumRecord>> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    nucleus: String,
    freq_hz: f64,
    magnitude: f64,
    phase_deg: f64,
    element_r: usize,
    element_c: usize,
}

/// CSV mirror of the record list, one peak per row.
pub fn records_to_csv(records: &[SpectrumRecord]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for record in records {
        for peak in &record.peaks {
            writer.serialize(CsvRow {
                nucleus: record.nucleus.clone(),
                freq_hz: peak.freq_hz,
                magnitude: peak.magnitude,
                phase_deg: peak.phase_deg,
                element_r: peak.element[0],
                element_c: peak.element[1],
            })?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| Error::InvalidConfig {
        reason: format!("csv buffer error: {e}"),
    })?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidConfig {
        reason: format!("csv produced invalid utf-8: {e}"),
    })
}

/// Parse the CSV mirror back into records; consecutive rows with the same
/// nucleus are grouped into one record.
pub fn records_from_csv(text: &str) -> Result<Vec<SpectrumRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut records: Vec<SpectrumRecord> = Vec::new();
    for row in reader.deserialize() {
        let row: CsvRow = row?;
        let peak = PeakRecord {
            freq_hz: row.freq_hz,
            magnitude: row.magnitude,
            phase_deg: row.phase_deg,
            element: [row.element_r, row.element_c],
        };
        match records.last_mut() {
            Some(last) if last.nucleus == row.nucleus => last.peaks.push(peak),
            _ => records.push(SpectrumRecord {
                nucleus: row.nucleus,
                peaks: vec![peak],
            }),
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nmr::DeviationDensityMatrix;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z() -> Complex64 {
        c(0.0, 0.0)
    }

    /// |ψ₁⟩⟨ψ₁| - I/4.
    fn epr_outer_deviation() -> DeviationDensityMatrix {
        DeviationDensityMatrix::new(array![
            [c(0.25, 0.0), z(), z(), c(0.5, 0.0)],
            [z(), c(-0.25, 0.0), z(), z()],
            [z(), z(), c(-0.25, 0.0), z()],
            [c(0.5, 0.0), z(), z(), c(0.25, 0.0)],
        ])
        .unwrap()
    }

    /// The pseudo-pure deviation matrix diag(3,-1,-1,-1)/4.
    fn pseudo_pure_ideal() -> DeviationDensityMatrix {
        DeviationDensityMatrix::new(array![
            [c(0.75, 0.0), z(), z(), z()],
            [z(), c(-0.25, 0.0), z(), z()],
            [z(), z(), c(-0.25, 0.0), z()],
            [z(), z(), z(), c(-0.25, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn readout_of_the_outer_epr_state_matches_the_known_matrix() {
        let rotated = apply_readout(&epr_outer_deviation(), ReadoutPulse::Spin2);
        let ideal = ideal_readout_matrix(EprCase::Psi1);
        assert!(rotated.max_abs_diff(&ideal) < 1e-14);
    }

    #[test]
    fn readout_of_the_pseudo_pure_state_matches_the_reference_matrices() {
        let sr1 = apply_readout(&pseudo_pure_ideal(), ReadoutPulse::Spin1);
        assert!(sr1.max_abs_diff(&ideal_reference_readout(Nucleus::Carbon)) < 1e-14);

        let sr2 = apply_readout(&pseudo_pure_ideal(), ReadoutPulse::Spin2);
        assert!(sr2.max_abs_diff(&ideal_reference_readout(Nucleus::Proton)) < 1e-14);
    }

    #[test]
    fn ideal_calibration_phases_are_unity() {
        let reference = calibrate_reference(&SpinSystem::default()).unwrap();
        assert!((reference.carbon_phase - c(1.0, 0.0)).norm() < 1e-12);
        assert!((reference.proton_phase - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn calibration_compensates_coherence_phases() {
        let raw = c(-0.5, 0.0);
        let theta = 0.85;
        let twisted = raw * crate::linalg::expi(theta);
        let phase = calibration_phase(twisted).unwrap();
        // The calibrated element is the same real negative value either way.
        assert!((phase * twisted - c(-0.5, 0.0)).norm() < 1e-14);
        assert!((calibration_phase(raw).unwrap() * raw - c(-0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn calibration_is_idempotent() {
        let element = c(0.3, -0.4);
        let phase = calibration_phase(element).unwrap();
        let calibrated = phase * element;
        let second = calibration_phase(calibrated).unwrap();
        assert!((second - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn calibration_rejects_vanishing_elements() {
        assert!(matches!(
            calibration_phase(z()),
            Err(Error::CalibrationImpossible { .. })
        ));
    }

    #[test]
    fn carbon_peaks_of_the_outer_case_have_equal_magnitude_opposite_phase() {
        let sys = SpinSystem::default();
        let rho_r = ideal_readout_matrix(EprCase::Psi1);
        let peaks = extract_peaks(&rho_r, Nucleus::Carbon, &ReferencePhase::neutral(), &sys);
        assert_eq!(peaks.len(), 2);
        assert_eq!(peaks[0].element, (0, 2));
        assert_eq!(peaks[1].element, (1, 3));
        assert!((peaks[0].amplitude - c(0.25, 0.0)).norm() < 1e-14);
        assert!((peaks[1].amplitude - c(-0.25, 0.0)).norm() < 1e-14);
        assert!((peaks[0].magnitude() - peaks[1].magnitude()).abs() < 1e-14);
        assert!((peaks[0].phase_deg().unwrap() - 0.0).abs() < 1e-9);
        assert!((peaks[1].phase_deg().unwrap().abs() - 180.0).abs() < 1e-9);
        assert!((peaks[0].frequency_offset_hz - 107.5).abs() < 1e-12);
        assert!((peaks[1].frequency_offset_hz + 107.5).abs() < 1e-12);
    }

    #[test]
    fn proton_peaks_of_the_inner_case() {
        let sys = SpinSystem::default();
        let rho_r = ideal_readout_matrix(EprCase::Psi3);
        let peaks = extract_peaks(&rho_r, Nucleus::Proton, &ReferencePhase::neutral(), &sys);
        assert!((peaks[0].amplitude - c(0.25, 0.0)).norm() < 1e-14); // (0,1)
        assert!((peaks[1].amplitude - c(-0.25, 0.0)).norm() < 1e-14); // (2,3)
    }

    #[test]
    fn diagonal_matrices_have_silent_peaks() {
        let sys = SpinSystem::default();
        let peaks = extract_peaks(
            &pseudo_pure_ideal(),
            Nucleus::Carbon,
            &ReferencePhase::neutral(),
            &sys,
        );
        for peak in &peaks {
            assert!(peak.magnitude() < OBSERVABLE_FLOOR);
            assert!(peak.phase_deg().is_none());
        }
    }

    #[test]
    fn classification_recovers_each_case() {
        let sys = SpinSystem::default();
        let reference = ReferencePhase::neutral();
        for case in EprCase::ALL {
            let rho_r = ideal_readout_matrix(case);
            let carbon = extract_peaks(&rho_r, Nucleus::Carbon, &reference, &sys);
            let proton = extract_peaks(&rho_r, Nucleus::Proton, &reference, &sys);
            assert_eq!(classify_epr(&carbon, &proton), Some(case));
        }
    }

    #[test]
    fn classification_of_silence_is_unknown() {
        assert_eq!(classify_epr(&[], &[]), None);
        let sys = SpinSystem::default();
        let quiet = extract_peaks(
            &pseudo_pure_ideal(),
            Nucleus::Carbon,
            &ReferencePhase::neutral(),
            &sys,
        );
        assert_eq!(classify_epr(&quiet, &[]), None);
    }

    #[test]
    fn emitted_sticks_sit_at_the_resonance_plus_minus_half_j() {
        let sys = SpinSystem::default();
        let rho_r = ideal_readout_matrix(EprCase::Psi1);
        let peaks = extract_peaks(&rho_r, Nucleus::Carbon, &ReferencePhase::neutral(), &sys);
        let record = emit_spectrum(Nucleus::Carbon, &peaks, &sys);
        assert_eq!(record.nucleus, "carbon");
        assert_eq!(record.peaks[0].freq_hz, 125_760_107.5);
        assert_eq!(record.peaks[1].freq_hz, 125_759_892.5);
    }

    #[test]
    fn zero_amplitude_peaks_are_emitted_with_zero_magnitude() {
        let sys = SpinSystem::default();
        let peaks = extract_peaks(
            &pseudo_pure_ideal(),
            Nucleus::Proton,
            &ReferencePhase::neutral(),
            &sys,
        );
        let record = emit_spectrum(Nucleus::Proton, &peaks, &sys);
        for peak in &record.peaks {
            assert_eq!(peak.magnitude, 0.0);
            assert_eq!(peak.phase_deg, 0.0);
        }
    }

    #[test]
    fn records_round_trip_through_json_and_csv() {
        let sys = SpinSystem::default();
        let reference = ReferencePhase::neutral();
        let rho_r = ideal_readout_matrix(EprCase::Psi2);
        let records = vec![
            emit_spectrum(
                Nucleus::Carbon,
                &extract_peaks(&rho_r, Nucleus::Carbon, &reference, &sys),
                &sys,
            ),
            emit_spectrum(
                Nucleus::Proton,
                &extract_peaks(&rho_r, Nucleus::Proton, &reference, &sys),
                &sys,
            ),
        ];

        let json = records_to_json(&records).unwrap();
        assert_eq!(records_from_json(&json).unwrap(), records);

        let csv_text = records_to_csv(&records).unwrap();
        assert_eq!(records_from_csv(&csv_text).unwrap(), records);
    }
}
