//! Seeded batches of independent runs and their statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::fields::initial_field;
use crate::numerics::ComplexMatrix;
use crate::optimizers::{gradient_flow, pmp_iterate, AlgorithmConfig, OptimizationRun};
use crate::systems::{custom_dipole, custom_drift, ControlSystem, TargetGate};

pub const SCHEMA_VERSION: u32 = 1;
pub const SADDLE_THRESHOLDS: [f64; 3] = [0.1, 0.05, 0.01];

/// One run with everything needed to re-evaluate it later.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub config: ExperimentConfig,
    pub drift_levels: Vec<f64>,
    pub dipole: ComplexMatrix,
    pub target: ComplexMatrix,
    pub run: OptimizationRun,
}

impl RunRecord {
    pub fn system(&self) -> Result<ControlSystem> {
        let drift = custom_drift(ComplexMatrix::from_real_diagonal(&self.drift_levels))?;
        ControlSystem::new(drift, custom_dipole(self.dipole.clone())?)
    }

    pub fn target_gate(&self) -> Result<TargetGate> {
        TargetGate::custom(self.target.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RunOutcome {
    Completed(Box<RunRecord>),
    Failed {
        seed: u64,
        #[serde(rename = "N")]
        n: usize,
        error: String,
    },
}

impl RunOutcome {
    pub fn seed(&self) -> u64 {
        match self {
            RunOutcome::Completed(r) => r.seed,
            RunOutcome::Failed { seed, .. } => *seed,
        }
    }

    pub fn record(&self) -> Option<&RunRecord> {
        match self {
            RunOutcome::Completed(r) => Some(r),
            RunOutcome::Failed { .. } => None,
        }
    }
}

/// Builds the system, target and initial field for `seed` and optimizes.
pub fn run_single(config: &ExperimentConfig, n: usize, seed: u64) -> Result<RunRecord> {
    let system = config.system(n, seed)?;
    let target = config.target(n, seed)?;
    let grid = config.grid(&system)?;
    let field = initial_field(&grid, &config.field_params(), seed, &system)?;
    let run = match config.algorithm() {
        AlgorithmConfig::GradientFlow(c) => gradient_flow(&system, &target, &field, &c)?,
        AlgorithmConfig::Pmp(c) => pmp_iterate(&system, &target, &field, &c)?,
    };
    Ok(RunRecord {
        schema_version: SCHEMA_VERSION,
        seed,
        n,
        config: config.clone(),
        drift_levels: system.drift().levels().to_vec(),
        dipole: system.dipole().matrix().clone(),
        target: target.matrix().clone(),
        run,
    })
}

/// `WORKERS` from the environment, else the configured count, else all cores.
pub fn worker_count(config: &ExperimentConfig) -> usize {
    std::env::var("WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .or(config.experiment.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleFraction {
    pub threshold: f64,
    pub count: usize,
    /// Over completed runs.
    pub fraction: f64,
    /// Mean effort of converged runs that met the threshold.
    pub mean_effort: Option<f64>,
}

/// Effort statistics for one cell; the standard deviation is the population one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub seeds: usize,
    pub completed: usize,
    pub failed: usize,
    pub converged: usize,
    pub convergence_fraction: f64,
    pub mean_effort: Option<f64>,
    pub std_effort: Option<f64>,
    pub saddle: Vec<SaddleFraction>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn population_std(v: &[f64]) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let m = mean(v)?;
    Some((v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt())
}

impl StatsSummary {
    pub fn from_outcomes(n: usize, outcomes: &[RunOutcome]) -> Self {
        let records: Vec<&RunRecord> = outcomes.iter().filter_map(RunOutcome::record).collect();
        let converged: Vec<&RunRecord> = records.iter().copied().filter(|r| r.run.converged()).collect();
        let efforts: Vec<f64> = converged.iter().map(|r| r.run.effort as f64).collect();
        let completed = records.len();
        let saddle = SADDLE_THRESHOLDS
            .iter()
            .map(|&threshold| {
                let hit = |r: &RunRecord| r.run.saddle.as_ref().is_some_and(|s| s.record.s_min < threshold);
                let count = records.iter().filter(|r| hit(r)).count();
                let efforts: Vec<f64> = converged
                    .iter()
                    .filter(|r| hit(r))
                    .map(|r| r.run.effort as f64)
                    .collect();
                SaddleFraction {
                    threshold,
                    count,
                    fraction: if completed == 0 { 0.0 } else { count as f64 / completed as f64 },
                    mean_effort: mean(&efforts),
                }
            })
            .collect();
        Self {
            n,
            seeds: outcomes.len(),
            completed,
            failed: outcomes.len() - completed,
            converged: converged.len(),
            convergence_fraction: if outcomes.is_empty() {
                0.0
            } else {
                converged.len() as f64 / outcomes.len() as f64
            },
            mean_effort: mean(&efforts),
            std_effort: population_std(&efforts),
            saddle,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub summary: StatsSummary,
    /// Sorted by seed.
    pub outcomes: Vec<RunOutcome>,
}

/// Runs every seed of the configuration at dimension `n`; failures are recorded, not raised.
pub fn run_batch(config: &ExperimentConfig, n: usize) -> Result<BatchResult> {
    let seeds: Vec<u64> = config.run_seeds().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut outcomes: Vec<RunOutcome> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| match run_single(config, n, seed) {
                Ok(r) => RunOutcome::Completed(Box::new(r)),
                Err(e) => RunOutcome::Failed {
                    seed,
                    n,
                    error: e.to_string(),
                },
            })
            .collect()
    });
    outcomes.sort_by_key(RunOutcome::seed);
    Ok(BatchResult {
        summary: StatsSummary::from_outcomes(n, &outcomes),
        outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub summaries: Vec<StatsSummary>,
    /// Least-squares slope of ln(mean effort) against N; absent for fewer than two usable cells.
    pub log_effort_slope: Option<f64>,
}

pub fn log_effort_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(n, e)| (n as f64, e.ln()))
        .collect();
    let xm = mean(&pts.iter().map(|p| p.0).collect::<Vec<_>>())?;
    let ym = mean(&pts.iter().map(|p| p.1).collect::<Vec<_>>())?;
    let sxx: f64 = pts.iter().map(|(x, _)| (x - xm).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|(x, y)| (x - xm) * (y - ym)).sum::<f64>() / sxx)
}

/// One batch per N in the configuration.
pub fn scaling_study(config: &ExperimentConfig) -> Result<(ScalingStudy, Vec<BatchResult>)> {
    config.validate()?;
    let mut batches = Vec::new();
    for &n in &config.experiment.n {
        batches.push(run_batch(config, n)?);
    }
    let summaries: Vec<StatsSummary> = batches.iter().map(|b| b.summary.clone()).collect();
    let points: Vec<(usize, f64)> = summaries.iter().filter_map(|s| s.mean_effort.map(|m| (s.n, m))).collect();
    Ok((
        ScalingStudy {
            log_effort_slope: log_effort_slope(&points),
            summaries,
        },
        batches,
    ))
}
