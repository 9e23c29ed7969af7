//! TOML run configuration.
//!
//! Every table rejects unknown keys. Only the table belonging to the
//! subcommand being run is consulted; the others may be present.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use driven_qubits::dynamics::{EvolveOptions, InitialState};
use driven_qubits::entanglement::EventOptions;
use driven_qubits::experiments::{Axis, ExperimentSettings};
use driven_qubits::linalg::{CMatrix, DensityMatrix};
use driven_qubits::optimize::linspace;
use driven_qubits::{Parameter, SystemParams};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    pub evolve: Option<EvolveConfig>,
    pub steady: Option<SteadyConfig>,
    pub sweep: Option<SweepConfig>,
    pub border: Option<BorderConfig>,
    pub optimum: Option<OptimumConfig>,
    pub events: Option<EventsConfig>,
    #[serde(rename = "oracle-check")]
    pub oracle_check: Option<OracleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A value shared by all qubits or one value per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerQubit {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerQubit {
    fn expand(&self, n: usize, name: &str) -> Result<Vec<f64>, CliError> {
        match self {
            PerQubit::Uniform(x) => Ok(vec![*x; n]),
            PerQubit::Each(v) if v.len() == n => Ok(v.clone()),
            PerQubit::Each(v) => Err(CliError::Config(format!(
                "system.{name} has {} entries for {n} qubits",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub n_qubits: usize,
    pub omega: PerQubit,
    pub delta: PerQubit,
    #[serde(rename = "J")]
    pub coupling_j: f64,
    pub gamma: PerQubit,
    pub nbar: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_qubits: 2,
            omega: PerQubit::Uniform(1.0),
            delta: PerQubit::Uniform(0.0),
            coupling_j: 1.5,
            gamma: PerQubit::Uniform(0.8),
            nbar: 0.0,
        }
    }
}

impl SystemConfig {
    pub fn params(&self) -> Result<SystemParams, CliError> {
        let n = self.n_qubits;
        Ok(SystemParams::new(
            n,
            self.omega.expand(n, "omega")?,
            self.delta.expand(n, "delta")?,
            self.coupling_j,
            self.gamma.expand(n, "gamma")?,
            self.nbar,
        )?)
    }
}

/// Initial state: `theta` for `cos θ|↓…↓⟩ + sin θ|↑…↑⟩`, or an explicit
/// density matrix as row-major `[re, im, re, im, …]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub theta: Option<f64>,
    pub matrix: Option<Vec<f64>>,
}

impl InitialConfig {
    pub fn state(&self, n_qubits: usize, numerics: &NumericsConfig) -> Result<InitialState, CliError> {
        match (self.theta, &self.matrix) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "initial: give either theta or matrix, not both".into(),
            )),
            (Some(t), None) => Ok(InitialState::theta(t)?),
            (None, None) => Ok(InitialState::ground()),
            (None, Some(flat)) => {
                let d = 1usize << n_qubits;
                if flat.len() != 2 * d * d {
                    return Err(CliError::Config(format!(
                        "initial.matrix needs {} numbers (re/im pairs of a {d}x{d} matrix), got {}",
                        2 * d * d,
                        flat.len()
                    )));
                }
                let m = CMatrix::from_fn(d, d, |i, j| {
                    let k = 2 * (i * d + j);
                    driven_qubits::linalg::ONE * flat[k] + driven_qubits::linalg::I * flat[k + 1]
                });
                Ok(InitialState::Density(DensityMatrix::new(m, &numerics.tolerances())?))
            }
        }
    }
}

/// Integrator tolerances and classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Negativity above which a state counts as entangled.
    pub epsilon: f64,
    pub coarse_points: usize,
    pub time_resolution: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let ev = EvolveOptions::default();
        let ex = ExperimentSettings::default();
        Self {
            rtol: ev.integrator.rtol,
            atol: ev.integrator.atol,
            epsilon: ex.epsilon,
            coarse_points: ex.coarse_points,
            time_resolution: EventOptions::default().time_resolution,
        }
    }
}

impl NumericsConfig {
    pub fn tolerances(&self) -> driven_qubits::Tolerances {
        driven_qubits::Tolerances::default()
    }

    pub fn evolve_options(&self) -> Result<EvolveOptions, CliError> {
        let mut o = EvolveOptions::default();
        o.integrator.rtol = self.rtol;
        o.integrator.atol = self.atol;
        o.integrator.validate()?;
        Ok(o)
    }

    pub fn experiment_settings(&self) -> Result<ExperimentSettings, CliError> {
        if !(self.epsilon > 0.0) {
            return Err(CliError::Config(format!(
                "numerics.epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(ExperimentSettings {
            epsilon: self.epsilon,
            coarse_points: self.coarse_points,
            tolerances: self.tolerances(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RouteChoice {
    #[default]
    Ode,
    Exponential,
    Elementwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub samples: usize,
    pub route: RouteChoice,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_end: 60.0,
            samples: 601,
            route: RouteChoice::Ode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadyConfig {
    /// Negativities below this are reported with a warning.
    pub warn_below: f64,
    /// Relative Γ perturbation used to test whether the state sits on the border.
    pub border_probe: f64,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        Self {
            warn_below: 1e-4,
            border_probe: 0.02,
        }
    }
}

/// Either an explicit list or `{ start, stop, count }` with both ends included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range { start, stop, count } => linspace(*start, *stop, *count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: Parameter,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub parameter: Parameter,
    pub grid: GridSpec,
}

impl AxisConfig {
    pub fn axis(&self) -> Axis {
        Axis {
            parameter: self.parameter,
            grid: self.grid.values(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BorderConfig {
    pub axis1: AxisConfig,
    pub axis2: AxisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimumConfig {
    #[serde(default = "default_optimum_parameter")]
    pub parameter: Parameter,
    pub bracket: [f64; 2],
    #[serde(default = "default_optimum_tol")]
    pub tol: f64,
    /// If present, the Γ optimum is located for each bath occupation.
    pub nbar: Option<Vec<f64>>,
}

fn default_optimum_parameter() -> Parameter {
    Parameter::Gamma
}

fn default_optimum_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EventsConfig {
    pub t_end: f64,
    pub samples: usize,
    /// Transposed side of the bipartition.
    pub subsystem: Vec<usize>,
}

impl Default for EventsConfig {
    fn default() -> Self {
        Self {
            t_end: 30.0,
            samples: 301,
            subsystem: vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub t_end: f64,
    pub samples: usize,
    /// Largest acceptable elementwise disagreement.
    pub limit: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            t_end: 60.0,
            samples: 601,
            limit: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = parse("").unwrap();
        assert_eq!(c.system, SystemConfig::default());
        assert!(c.sweep.is_none());
        c.system.params().unwrap();
    }

    #[test]
    fn unknown_keys_are_fatal() {
        let e = parse("[system]\ngama = 0.3\n").unwrap_err();
        assert!(e.to_string().contains("gama"), "{e}");
        assert!(parse("[bogus]\n").is_err());
        assert!(parse("[sweep]\nparameter = \"gamma\"\ngrid = [0.1]\nextra = 1\n").is_err());
    }

    #[test]
    fn grids_in_both_forms() {
        let c = parse(
            "[sweep]\nparameter = \"gamma\"\ngrid = { start = 0.0, stop = 1.0, count = 3 }\n\
             [border]\naxis1 = { parameter = \"J\", grid = [0.5, 1.0] }\n\
             axis2 = { parameter = \"nbar\", grid = [0.0, 0.1] }\n",
        )
        .unwrap();
        assert_eq!(c.sweep.unwrap().grid.values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(c.border.unwrap().axis1.parameter, Parameter::CouplingJ);
    }

    #[test]
    fn per_qubit_lengths_checked() {
        let c = parse("[system]\ngamma = [0.1, 0.2, 0.3]\n").unwrap();
        assert!(c.system.params().is_err());
        let c = parse("[system]\ngamma = [0.1, 0.2]\nJ = 2.0\n").unwrap();
        assert_eq!(c.system.params().unwrap().gamma(), &[0.1, 0.2]);
    }

    #[test]
    fn explicit_initial_matrix() {
        let mut flat = vec![0.0; 32];
        flat[0] = 0.5;
        flat[2 * 15] = 0.5;
        let init = InitialConfig { theta: None, matrix: Some(flat) };
        assert!(init.state(2, &NumericsConfig::default()).is_ok());
        let bad = InitialConfig { theta: None, matrix: Some(vec![1.0; 4]) };
        assert!(bad.state(2, &NumericsConfig::default()).is_err());
        let both = InitialConfig { theta: Some(0.0), matrix: Some(vec![]) };
        assert!(both.state(2, &NumericsConfig::default()).is_err());
    }
}
