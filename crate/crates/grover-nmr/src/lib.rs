//! Generalized multi-target Grover search with a pulse-level two-spin NMR
//! machine model.
//!
//! The crate has two layers that must agree with each other:
//!
//! - an abstract layer ([`grover`], [`recursion`]) that simulates the
//!   generalized search iteration on dense state vectors and solves the
//!   same evolution in closed form through a 2x2 transfer-matrix
//!   eigendecomposition;
//! - a machine layer ([`nmr`], [`pulse`], [`spectra`]) that prepares a
//!   pseudo-pure state by spatial averaging, compiles the search operators
//!   into rf/evolution pulse programs, applies them to deviation density
//!   matrices, and predicts the resulting stick spectra and their
//!   EPR-state classification.
//!
//! [`preset`] collects the four entangled-target experiments that exercise
//! the whole pipeline; [`cli`] wires everything into the `grover-nmr`
//! binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod grover;
pub mod linalg;
pub mod nmr;
pub mod preset;
pub mod pulse;
pub mod recursion;
pub mod spectra;

pub use error::{Error, Result};
pub use grover::{MarkedSet, PhaseParams, StateVector, UnitaryMatrix};
pub use nmr::{DeviationDensityMatrix, PulseEvent, SpinSystem};
pub use preset::EprCase;
pub use pulse::{CompiledOperator, PulseSequence};
