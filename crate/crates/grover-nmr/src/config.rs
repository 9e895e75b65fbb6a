//! Experiment configuration: a TOML file plus command-line overrides,
//! overrides winning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{self, MarkedSet, PhaseParams, UnitaryMatrix};
use crate::nmr::SpinSystem;
use crate::preset::EprCase;

/// Output rendering for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Text,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::InvalidConfig {
                reason: format!("unknown output format '{other}'"),
            }),
        }
    }
}

/// Preparation-unitary description: explicit rotation angles for the
/// two-spin y-rotations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepAngles {
    pub phi1: f64,
    pub phi2: f64,
}

/// Raw experiment configuration as read from the config file. Every field
/// is optional; [`ExperimentConfig::resolve`] fills defaults, expands the
/// named case, and validates.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Hilbert-space dimension (a power of two).
    pub dim: Option<usize>,
    /// Source basis index |s⟩.
    pub source_index: Option<usize>,
    /// Marked basis indices.
    pub marked: Option<Vec<usize>>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// Explicit preparation rotation angles (ignored when `case` names a
    /// preset).
    pub prep: Option<PrepAngles>,
    /// Named case: psi1..psi4 or grover4.
    pub case: Option<String>,
    /// Iteration count; absent means "auto" (solve for the target
    /// iteration).
    pub iterations: Option<u32>,
    /// Upper bound for tables and target searches.
    pub n_max: Option<u32>,
    pub spin_system: Option<SpinSystem>,
    pub output: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Merge command-line overrides into the file values; overrides win.
    pub fn with_overrides(
        mut self,
        case: Option<String>,
        iterations: Option<u32>,
        output: Option<OutputFormat>,
    ) -> Self {
        if case.is_some() {
            self.case = case;
        }
        if iterations.is_some() {
            self.iterations = iterations;
        }
        if output.is_some() {
            self.output = output;
        }
        self
    }

    /// Validate and expand into a concrete experiment.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let named = match self.case.as_deref() {
            Some(name) => Some(NamedCase::parse(name)?),
            None => None,
        };

        let spin_system = match self.spin_system {
            Some(sys) => {
                sys.validate()?;
                sys
            }
            None => SpinSystem::default(),
        };
        let output = self.output.unwrap_or_default();
        let n_max = self.n_max.unwrap_or(30);

        match named {
            Some(NamedCase::Epr(case)) => Ok(ResolvedExperiment {
                label: case.label().to_string(),
                epr_case: Some(case),
                preparation: case.preparation(),
                source_index: case.source(),
                marked: case.marked(),
                phases: case.phases(),
                iterations: self.iterations,
                n_max,
                spin_system,
                output,
            }),
            Some(NamedCase::Grover4) => {
                let marked = match &self.marked {
                    Some(list) => MarkedSet::new(4, list.iter().copied())?,
                    None => MarkedSet::new(4, [2])?,
                };
                Ok(ResolvedExperiment {
                    label: "grover4".to_string(),
                    epr_case: None,
                    preparation: grover::walsh_hadamard(2),
                    source_index: self.source_index.unwrap_or(0),
                    marked,
                    phases: PhaseParams::new(
                        self.beta.unwrap_or(std::f64::consts::PI),
                        self.gamma.unwrap_or(std::f64::consts::PI),
                    ),
                    iterations: self.iterations,
                    n_max,
                    spin_system,
                    output,
                })
            }
            None => {
                let dim = self.dim.unwrap_or(4);
                if dim == 0 || !dim.is_power_of_two() {
                    return Err(Error::InvalidConfig {
                        reason: format!("dim must be a positive power of two, got {dim}"),
                    });
                }
                let prep = self.prep.ok_or_else(|| Error::InvalidConfig {
                    reason: "either 'case' or 'prep' angles must be given".into(),
                })?;
                if dim != 4 {
                    return Err(Error::InvalidConfig {
                        reason: "explicit prep angles describe a two-spin system; dim must be 4"
                            .into(),
                    });
                }
                let marked_list = self.marked.clone().ok_or_else(|| Error::InvalidConfig {
                    reason: "'marked' is required without a named case".into(),
                })?;
                let marked = MarkedSet::new(dim, marked_list)?;
                let (beta, gamma) = match (self.beta, self.gamma) {
                    (Some(b), Some(g)) => (b, g),
                    _ => {
                        return Err(Error::InvalidConfig {
                            reason: "'beta' and 'gamma' are required without a named case".into(),
                        })
                    }
                };
                Ok(ResolvedExperiment {
                    label: "custom".to_string(),
                    epr_case: None,
                    preparation: grover::two_spin_rotation(
                        grover::RotationAxis::Y,
                        prep.phi1,
                        grover::RotationAxis::Y,
                        prep.phi2,
                    ),
                    source_index: self.source_index.unwrap_or(0),
                    marked,
                    phases: PhaseParams::new(beta, gamma),
                    iterations: self.iterations,
                    n_max,
                    spin_system,
                    output,
                })
            }
        }
    }
}

/// Case names accepted on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedCase {
    Epr(EprCase),
    Grover4,
}

impl NamedCase {
    pub fn parse(name: &str) -> Result<Self> {
        if name.eq_ignore_ascii_case("grover4") {
            return Ok(NamedCase::Grover4);
        }
        name.parse::<EprCase>()
            .map(NamedCase::Epr)
            .map_err(|_| Error::InvalidConfig {
                reason: format!("unknown case '{name}' (expected psi1..psi4 or grover4)"),
            })
    }
}

/// A fully validated experiment ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub label: String,
    pub epr_case: Option<EprCase>,
    pub preparation: UnitaryMatrix,
    pub source_index: usize,
    pub marked: MarkedSet,
    pub phases: PhaseParams,
    /// `None` means auto: use the solver's target iteration.
    pub iterations: Option<u32>,
    pub n_max: u32,
    pub spin_system: SpinSystem,
    pub output: OutputFormat,
}
