//! Experiment configuration: a sectioned `key = value` file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{default_grid, FieldParams, Spacing, TimeGrid};
use crate::numerics::ComplexMatrix;
use crate::optimizers::{AlgorithmConfig, FlowConfig, PMPConfig, RecordFlags};
use crate::systems::{
    build_dipole_banded, build_dipole_d, build_dipole_flat, build_dipole_sparse_with_drift, build_dipole_tensor,
    build_oscillator_drift, build_qft_gate, build_rotor_drift, custom_dipole, custom_drift, read_matrix_file,
    ControlHamiltonian, ControlSystem, DriftHamiltonian, Signs, TargetGate, DEFAULT_ALPHA, DEFAULT_ANHARMONICITY,
    DEFAULT_OMEGA,
};

/// Largest N run without `expensive`.
pub const STANDARD_MAX_N: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftChoice {
    Rotor,
    Oscillator,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DipoleChoice {
    D,
    Banded,
    Sparse,
    Tensor,
    Flat,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetChoice {
    Identity,
    Haar,
    Qft,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmChoice {
    Flow,
    Pmp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub drift: DriftChoice,
    pub omega: f64,
    pub anharmonicity: f64,
    pub drift_file: Option<PathBuf>,
    pub dipole: DipoleChoice,
    /// D of the D structure.
    pub coupling: f64,
    pub bands: usize,
    pub fraction: f64,
    pub alpha: f64,
    pub dipole_file: Option<PathBuf>,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            drift: DriftChoice::Rotor,
            omega: DEFAULT_OMEGA,
            anharmonicity: DEFAULT_ANHARMONICITY,
            drift_file: None,
            dipole: DipoleChoice::D,
            coupling: 1.0,
            bands: 2,
            fraction: 0.5,
            alpha: DEFAULT_ALPHA,
            dipole_file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSection {
    pub kind: TargetChoice,
    pub file: Option<PathBuf>,
}

impl Default for TargetSection {
    fn default() -> Self {
        Self {
            kind: TargetChoice::Haar,
            file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub seeds: usize,
    /// First run seed; run i uses seed + i.
    pub seed: u64,
    pub t_final: Option<f64>,
    pub n_points: Option<usize>,
    pub output: PathBuf,
    pub expensive: bool,
    pub workers: Option<usize>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            n: vec![2],
            seeds: 20,
            seed: 0,
            t_final: None,
            n_points: None,
            output: PathBuf::from("ucl-out"),
            expensive: false,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub algorithm: AlgorithmChoice,
    pub threshold: f64,
    pub max_iterations: Option<usize>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub fluence_penalty: f64,
    pub alpha: f64,
    pub beta: Option<f64>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let flow = FlowConfig::default();
        Self {
            algorithm: AlgorithmChoice::Flow,
            threshold: flow.convergence_threshold,
            max_iterations: None,
            rel_tol: flow.rel_tol,
            abs_tol: flow.abs_tol,
            fluence_penalty: 0.0,
            alpha: 1.0,
            beta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSection {
    /// Square root of the initial fluence (f).
    pub amplitude: f64,
    /// Number of Fourier components (K).
    pub components: usize,
    pub spacing: Spacing,
}

impl Default for FieldSection {
    fn default() -> Self {
        let p = FieldParams::default();
        Self {
            amplitude: p.amplitude,
            components: p.components,
            spacing: p.spacing,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub target: TargetSection,
    pub experiment: ExperimentSection,
    pub field: FieldSection,
    pub optimizer: OptimizerSection,
    pub metrics: RecordFlags,
}

fn parse_error(context: &Path, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        context: context.display().to_string(),
        message: message.to_string(),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| parse_error(path, e))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn field_params(&self) -> FieldParams {
        FieldParams {
            components: self.field.components,
            amplitude: self.field.amplitude,
            spacing: self.field.spacing,
        }
    }

    pub fn algorithm(&self) -> AlgorithmConfig {
        let o = &self.optimizer;
        match o.algorithm {
            AlgorithmChoice::Flow => {
                let d = FlowConfig::default();
                AlgorithmConfig::GradientFlow(FlowConfig {
                    rel_tol: o.rel_tol,
                    abs_tol: o.abs_tol,
                    convergence_threshold: o.threshold,
                    max_iterations: o.max_iterations.unwrap_or(d.max_iterations),
                    fluence_penalty: o.fluence_penalty,
                    record: self.metrics,
                    ..d
                })
            }
            AlgorithmChoice::Pmp => {
                let d = PMPConfig::default();
                AlgorithmConfig::Pmp(PMPConfig {
                    alpha: o.alpha,
                    beta: o.beta,
                    max_iterations: o.max_iterations.unwrap_or(d.max_iterations),
                    convergence_threshold: o.threshold,
                    record: self.metrics,
                })
            }
        }
    }

    pub fn drift(&self, n: usize) -> Result<DriftHamiltonian> {
        let s = &self.system;
        match s.drift {
            DriftChoice::Rotor => Ok(build_rotor_drift(n)),
            DriftChoice::Oscillator => build_oscillator_drift(n, s.omega, s.anharmonicity),
            DriftChoice::File => {
                let path = s
                    .drift_file
                    .as_ref()
                    .ok_or_else(|| Error::Config("drift = \"file\" needs drift_file".into()))?;
                let m = read_matrix_file(path)?;
                check_file_dim(path, &m, n)?;
                custom_drift(m)
            }
        }
    }

    /// Dipole for one run; random sign patterns and sparse layouts follow `seed`.
    pub fn dipole(&self, n: usize, seed: u64, drift: &DriftHamiltonian) -> Result<ControlHamiltonian> {
        let s = &self.system;
        match s.dipole {
            DipoleChoice::D => build_dipole_d(n, s.coupling, s.alpha, seed),
            DipoleChoice::Banded => build_dipole_banded(n, s.bands, s.alpha, Signs::Random(seed)),
            DipoleChoice::Sparse => build_dipole_sparse_with_drift(drift, s.fraction, s.alpha, seed),
            DipoleChoice::Tensor => build_dipole_tensor(qubits_of(n, "tensor dipole")?, s.alpha),
            DipoleChoice::Flat => Ok(build_dipole_flat(n, s.alpha, seed)),
            DipoleChoice::File => {
                let path = s
                    .dipole_file
                    .as_ref()
                    .ok_or_else(|| Error::Config("dipole = \"file\" needs dipole_file".into()))?;
                let m = read_matrix_file(path)?;
                check_file_dim(path, &m, n)?;
                custom_dipole(m)
            }
        }
    }

    pub fn system(&self, n: usize, seed: u64) -> Result<ControlSystem> {
        let drift = self.drift(n)?;
        let dipole = self.dipole(n, seed, &drift)?;
        ControlSystem::new(drift, dipole)
    }

    pub fn target(&self, n: usize, seed: u64) -> Result<TargetGate> {
        match self.target.kind {
            TargetChoice::Identity => Ok(TargetGate::identity(n)),
            TargetChoice::Haar => Ok(TargetGate::haar(n, seed)),
            TargetChoice::Qft => build_qft_gate(qubits_of(n, "QFT target")?),
            TargetChoice::File => {
                let path = self
                    .target
                    .file
                    .as_ref()
                    .ok_or_else(|| Error::Config("target kind = \"file\" needs file".into()))?;
                let m = read_matrix_file(path)?;
                check_file_dim(path, &m, n)?;
                TargetGate::custom(m)
            }
        }
    }

    pub fn grid(&self, system: &ControlSystem) -> Result<TimeGrid> {
        match self.experiment.n_points {
            Some(points) => TimeGrid::checked(
                self.experiment.t_final.unwrap_or(crate::fields::DEFAULT_T),
                points,
                system,
            ),
            None => default_grid(system, self.experiment.t_final),
        }
    }

    pub fn run_seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.experiment.seeds as u64).map(|i| self.experiment.seed + i)
    }

    /// Checks every precondition that can be checked before a run starts.
    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.n.is_empty() {
            return Err(Error::Config("N list is empty".into()));
        }
        for &n in &e.n {
            if n < 2 {
                return Err(Error::Config(format!("N = {n}: need N >= 2")));
            }
            if n > STANDARD_MAX_N && !e.expensive {
                return Err(Error::Config(format!(
                    "N = {n} exceeds {STANDARD_MAX_N}; pass --expensive to allow it"
                )));
            }
        }
        if let Some(w) = e.workers {
            if w == 0 {
                return Err(Error::Config("workers must be at least 1".into()));
            }
        }
        if let Some(t) = e.t_final {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config("t_final must be positive".into()));
            }
        }
        let f = &self.field;
        if !(f.amplitude > 0.0 && f.amplitude.is_finite()) {
            return Err(Error::Config("field amplitude must be positive".into()));
        }
        if f.components == 0 {
            return Err(Error::Config("field components must be at least 1".into()));
        }
        match self.algorithm() {
            AlgorithmConfig::GradientFlow(c) => c.validate()?,
            AlgorithmConfig::Pmp(c) => c.validate()?,
        }
        for &n in &e.n {
            let system = self.system(n, e.seed)?;
            self.target(n, e.seed)?;
            self.grid(&system)?;
        }
        Ok(())
    }
}

fn qubits_of(n: usize, what: &str) -> Result<u32> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(Error::Config(format!("{what} needs N a power of two, got {n}")))
    }
}

fn check_file_dim(path: &Path, m: &ComplexMatrix, n: usize) -> Result<()> {
    if m.dim() == n {
        Ok(())
    } else {
        Err(parse_error(path, format!("matrix is {}x{}, expected N = {n}", m.dim(), m.dim())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.run_seeds().count(), 20);
    }

    #[test]
    fn toml_sections_and_round_trip() {
        let text = r#"
[system]
drift = "oscillator"
dipole = "banded"
bands = 1

[experiment]
N = [2, 4]
seeds = 3
seed = 40

[optimizer]
algorithm = "pmp"
threshold = 1e-3

[metrics]
gramian = true
"#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(c.system.drift, DriftChoice::Oscillator);
        assert_eq!(c.experiment.n, vec![2, 4]);
        assert_eq!(c.run_seeds().collect::<Vec<_>>(), vec![40, 41, 42]);
        assert!(matches!(c.algorithm(), AlgorithmConfig::Pmp(p) if p.convergence_threshold == 1e-3 && p.record.gramian));
        c.validate().unwrap();
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(ExperimentConfig::from_toml_str("[system]\nbogus = 1\n").is_err());
        let mut c = ExperimentConfig::default();
        c.experiment.n = vec![32];
        assert!(c.validate().is_err());
        c.experiment.expensive = true;
        c.validate().unwrap();
        let mut c = ExperimentConfig::default();
        c.system.dipole = DipoleChoice::Tensor;
        c.experiment.n = vec![6];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.optimizer.threshold = 2.0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.experiment.n = vec![];
        assert!(c.validate().is_err());
    }
}
