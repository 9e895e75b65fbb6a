//! Error type shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary: max |U†U - I| = {deviation:.3e} exceeds {tol:.1e}")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("state vector is not normalized: |⟨ψ|ψ⟩ - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("matrix is not Hermitian and traceless within {tol:.1e} (deviation {deviation:.3e})")]
    NotDeviationForm { deviation: f64, tol: f64 },

    #[error(
        "preparation column entry U[{index}][s] vanishes (|entry| = {magnitude:.3e} ≤ {tol:.1e})"
    )]
    VanishingColumnEntry {
        index: usize,
        magnitude: f64,
        tol: f64,
    },

    #[error("transfer matrix is not diagonalizable: repeated eigenvalue {eigenvalue}")]
    DegenerateEigenvalues { eigenvalue: Complex64 },

    #[error("eigenvector matrix is numerically singular: |det S| = {det:.3e}")]
    SingularEigenbasis { det: f64 },

    #[error("invalid spin system: {reason}")]
    InvalidSpinSystem { reason: String },

    #[error("gamma ratio {value} outside (0, 2): preparation flip angle undefined")]
    FlipAngleUndefined { value: f64 },

    #[error("sequence contains a gradient event and has no net unitary")]
    NonUnitarySequence,

    #[error("unsupported compilation target: {reason}")]
    UnsupportedTarget { reason: String },

    #[error("compiled sequence deviates from its target by {deviation:.3e} (tolerance {tol:.1e})")]
    CompilationMismatch { deviation: f64, tol: f64 },

    #[error("deviation matrix has no resolvable pure part: {reason}")]
    NoPurePart { reason: String },

    #[error("reference calibration impossible: observable element magnitude {magnitude:.3e} below threshold")]
    CalibrationImpossible { magnitude: f64 },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    TomlParse(#[from] toml::de::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
