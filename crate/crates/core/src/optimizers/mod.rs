//! First-order searches over the control landscape and their bookkeeping.

mod flow;
mod pmp;

pub use flow::gradient_flow;
pub use pmp::{default_beta, pmp_iterate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{l2_distance, ControlField, TimeGrid};
use crate::landscape::{gramian, near_saddle, ratio_from, saddle_metric, SaddleRecord};
use crate::numerics::ComplexMatrix;
use crate::propagation::{dipole_in_time, propagate};
use crate::systems::{ControlSystem, TargetGate};

/// J values at which the current field is checkpointed (first crossing).
pub const MILESTONES: [f64; 4] = [2.0, 1.0, 0.1, 0.01];
/// Half-width of the window around J = 4m in which the saddle metric is sampled.
pub const SADDLE_BAND: f64 = 0.5;

/// True iff J ≤ threshold · 4N.
pub fn convergence_check(j: f64, n: usize, threshold: f64) -> bool {
    j <= threshold * 4.0 * n as f64
}

pub fn milestone_label(j: f64) -> String {
    format!("J={j}")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecordFlags {
    /// Slope and saddle metric at every accepted step.
    pub metrics: bool,
    /// Gramian condition number at every accepted step (costly).
    pub gramian: bool,
    /// Every accepted field.
    pub fields: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub convergence_threshold: f64,
    pub max_iterations: usize,
    pub fluence_penalty: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub record: RecordFlags,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            abs_tol: 1e-6,
            convergence_threshold: 1e-6,
            max_iterations: 10_000,
            fluence_penalty: 0.0,
            h_min: 1e-8,
            h_max: 10.0,
            record: RecordFlags::default(),
        }
    }
}

fn check_threshold(threshold: f64, max_iterations: usize) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param("convergence_threshold", "must lie in (0, 1)"));
    }
    if max_iterations == 0 {
        return Err(Error::param("max_iterations", "must be at least 1"));
    }
    Ok(())
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        check_threshold(self.convergence_threshold, self.max_iterations)?;
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::param("rel_tol/abs_tol", "must be positive"));
        }
        if !(self.fluence_penalty >= 0.0) {
            return Err(Error::param("fluence_penalty", "must be non-negative"));
        }
        if !(self.h_min > 0.0 && self.h_max >= self.h_min) {
            return Err(Error::param("h_min/h_max", "need 0 < h_min <= h_max"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PMPConfig {
    pub alpha: f64,
    /// None selects [`default_beta`].
    pub beta: Option<f64>,
    pub max_iterations: usize,
    pub convergence_threshold: f64,
    pub record: RecordFlags,
}

impl Default for PMPConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: None,
            max_iterations: 20_000,
            convergence_threshold: 1e-6,
            record: RecordFlags::default(),
        }
    }
}

impl PMPConfig {
    pub fn validate(&self) -> Result<()> {
        check_threshold(self.convergence_threshold, self.max_iterations)?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::param("alpha", "must lie in [0, 1]"));
        }
        if let Some(b) = self.beta {
            if !(b < 0.0 && b.is_finite()) {
                return Err(Error::param("beta", "must be negative"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    GradientFlow(FlowConfig),
    Pmp(PMPConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub label: String,
    #[serde(rename = "J")]
    pub j: f64,
    pub s: f64,
    pub step: usize,
    pub path_length: f64,
    pub field: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub step: usize,
    pub s: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub slope: Option<f64>,
    pub saddle: Option<f64>,
    pub gramian_condition: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleSnapshot {
    #[serde(flatten)]
    pub record: SaddleRecord,
    pub step: usize,
    pub field: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationRun {
    pub config: AlgorithmConfig,
    pub n: usize,
    pub grid: TimeGrid,
    pub s_values: Vec<f64>,
    #[serde(rename = "J_trace")]
    pub j_trace: Vec<f64>,
    /// Cumulative L² path length after each recorded step.
    pub path_length: Vec<f64>,
    pub effort: usize,
    pub rejected: usize,
    pub status: Status,
    pub checkpoints: Vec<Checkpoint>,
    pub metric_traces: Vec<MetricRecord>,
    pub saddle: Option<SaddleSnapshot>,
    pub fields: Option<Vec<Vec<f64>>>,
}

impl OptimizationRun {
    pub fn final_j(&self) -> f64 {
        *self.j_trace.last().expect("trace holds the initial value")
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn checkpoint(&self, label: &str) -> Option<&Checkpoint> {
        self.checkpoints.iter().find(|c| c.label == label)
    }

    pub fn milestone(&self, j: f64) -> Option<&Checkpoint> {
        self.checkpoint(&milestone_label(j))
    }

    pub fn initial_field(&self) -> ControlField {
        self.field_of("initial")
    }

    pub fn final_field(&self) -> ControlField {
        self.field_of("final")
    }

    fn field_of(&self, label: &str) -> ControlField {
        let c = self.checkpoint(label).expect("run always holds initial and final checkpoints");
        ControlField::new(self.grid, c.field.clone()).expect("checkpoint field matches grid")
    }

    /// Path length up to a checkpoint over its distance from the initial field.
    pub fn path_ratio_at(&self, label: &str) -> Result<f64> {
        let init = self
            .checkpoint("initial")
            .ok_or(Error::Degenerate("run without initial checkpoint"))?;
        let c = self
            .checkpoint(label)
            .ok_or_else(|| Error::param("checkpoint", format!("no checkpoint labelled {label}")))?;
        ratio_from(c.path_length, l2_distance(&init.field, &c.field, self.grid.dt()))
    }
}

/// Shared per-step bookkeeping for both optimizers.
pub(crate) struct Recorder<'a> {
    system: &'a ControlSystem,
    target: &'a TargetGate,
    run: OptimizationRun,
    pending: Vec<f64>,
    prev: Vec<f64>,
    flags: RecordFlags,
}

impl<'a> Recorder<'a> {
    pub fn new(
        system: &'a ControlSystem,
        target: &'a TargetGate,
        grid: TimeGrid,
        config: AlgorithmConfig,
        flags: RecordFlags,
    ) -> Self {
        Self {
            system,
            target,
            run: OptimizationRun {
                config,
                n: system.dim(),
                grid,
                s_values: Vec::new(),
                j_trace: Vec::new(),
                path_length: Vec::new(),
                effort: 0,
                rejected: 0,
                status: Status::MaxIter,
                checkpoints: Vec::new(),
                metric_traces: Vec::new(),
                saddle: None,
                fields: flags.fields.then(Vec::new),
            },
            pending: MILESTONES.to_vec(),
            prev: Vec::new(),
            flags,
        }
    }

    pub fn effort(&self) -> usize {
        self.run.effort
    }

    pub fn reject(&mut self) {
        self.run.rejected += 1;
    }

    fn checkpoint(&mut self, label: String, field: &[f64]) {
        self.run.checkpoints.push(Checkpoint {
            label,
            j: *self.run.j_trace.last().unwrap(),
            s: *self.run.s_values.last().unwrap(),
            step: self.run.effort,
            path_length: *self.run.path_length.last().unwrap(),
            field: field.to_vec(),
        });
    }

    /// Records an accepted state; the first call records the initial one.
    /// `gradient` enables the slope metric.
    pub fn observe(
        &mut self,
        s: f64,
        field: &[f64],
        j: f64,
        u_final: &ComplexMatrix,
        gradient: Option<&[f64]>,
    ) -> Result<()> {
        let dt = self.run.grid.dt();
        let first = self.prev.is_empty();
        if !first {
            self.run.effort += 1;
        }
        let travelled = if first { 0.0 } else { l2_distance(&self.prev, field, dt) };
        let total = self.run.path_length.last().copied().unwrap_or(0.0) + travelled;
        self.prev.clear();
        self.prev.extend_from_slice(field);
        self.run.j_trace.push(j);
        self.run.s_values.push(s);
        self.run.path_length.push(total);
        if first {
            self.checkpoint("initial".into(), field);
        }
        while let Some(&m) = self.pending.first() {
            if j > m {
                break;
            }
            self.pending.remove(0);
            self.checkpoint(milestone_label(m), field);
        }
        let n = self.run.n;
        let band = near_saddle(j, n, SADDLE_BAND);
        let defined = j > 0.0 && j < 4.0 * n as f64;
        let saddle = if defined && (self.flags.metrics || band.is_some()) {
            Some(saddle_metric(u_final, self.target, j)?)
        } else {
            None
        };
        if let (Some(m), Some(s_val)) = (band, saddle) {
            if self.run.saddle.as_ref().is_none_or(|r| s_val < r.record.s_min) {
                self.run.saddle = Some(SaddleSnapshot {
                    record: SaddleRecord {
                        j_at_min: j,
                        s_min: s_val,
                        nearest_m: m,
                    },
                    step: self.run.effort,
                    field: field.to_vec(),
                });
            }
        }
        if self.flags.metrics || self.flags.gramian {
            let slope = gradient.map(|g| (g.iter().map(|x| x * x).sum::<f64>() * dt).sqrt());
            let gramian_condition = if self.flags.gramian {
                let f = ControlField::new(self.run.grid, field.to_vec())?;
                let tr = propagate(self.system, &f)?;
                Some(gramian(&dipole_in_time(self.system, &tr), tr.u_final())?.condition_number)
            } else {
                None
            };
            self.run.metric_traces.push(MetricRecord {
                step: self.run.effort,
                s,
                j,
                slope,
                saddle: if self.flags.metrics { saddle } else { None },
                gramian_condition,
            });
        }
        if let Some(fields) = self.run.fields.as_mut() {
            fields.push(field.to_vec());
        }
        Ok(())
    }

    pub fn finish(mut self, status: Status) -> OptimizationRun {
        let field = self.prev.clone();
        self.checkpoint("final".into(), &field);
        self.run.status = status;
        self.run
    }

    /// Error carrying everything recorded so far.
    pub fn non_finite(self) -> Error {
        let effort = self.run.effort;
        let status = self.run.status;
        Error::NonFiniteObjective {
            effort,
            last_good: Box::new(self.finish(status)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_arithmetic() {
        assert!(convergence_check(0.0, 7, 1e-6));
        assert!(!convergence_check(0.017, 4, 1e-3));
        assert!(convergence_check(0.015, 4, 1e-3));
    }

    #[test]
    fn config_validation() {
        assert!(FlowConfig::default().validate().is_ok());
        let bad = FlowConfig {
            convergence_threshold: 1.0,
            ..FlowConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = FlowConfig {
            max_iterations: 0,
            ..FlowConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(PMPConfig::default().validate().is_ok());
        let bad = PMPConfig {
            alpha: 1.5,
            ..PMPConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = PMPConfig {
            beta: Some(0.1),
            ..PMPConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
