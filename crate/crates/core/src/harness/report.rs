//! Landscape profiles of finished runs and the on-disk output layout.
//!
//! ```text
//! <output>/summary.csv
//! <output>/runs/<seed>.json
//! <output>/spectra/<seed>_<milestone>.csv
//! ```
//! A multi-N study nests one such directory per N as `N<n>/` next to `scaling.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::batch::{BatchResult, RunOutcome, RunRecord, SaddleFraction, ScalingStudy, StatsSummary, SADDLE_THRESHOLDS, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::fields::{fourier_spectrum, ControlField, FieldSpectrum};
use crate::landscape::{
    gramian, hessian_signature, hessian_trace, local_curvature, saddle_metric, slope_bound, slope_metric,
    refine_critical_point, HessianSignature, SaddleRecord, DEFAULT_ZERO_FACTOR,
};
use crate::lie::{lie_closure, LieAnalysis, DEFAULT_TOL};
use crate::objective::{evaluate, hessian_kernel};
use crate::optimizers::{milestone_label, MetricRecord, OptimizationRun, MILESTONES};
use crate::propagation::{dipole_in_time, propagate};
use crate::systems::{ControlSystem, TargetGate};

/// Fraction of the spectral peak above which a bin counts as present.
pub const SPECTRAL_PEAK_FRACTION: f64 = 0.05;
pub const SPECTRUM_LABELS: [&str; 3] = ["initial", "J=1", "final"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub gramian: bool,
    pub hessian: bool,
    pub lie: bool,
    /// Also take the Hessian census at the exact critical point nearest to
    /// the optimum and to the saddle snapshot (requires `hessian`).
    pub refine: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            gramian: true,
            hessian: true,
            lie: true,
            refine: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilestoneMetrics {
    pub label: String,
    #[serde(rename = "J")]
    pub j: f64,
    pub step: usize,
    pub slope: f64,
    /// 𝒢 over its upper bound 2N√T‖μ‖.
    pub slope_fraction: f64,
    pub saddle: Option<f64>,
    pub path_ratio: Option<f64>,
    pub gramian_condition: Option<f64>,
    pub gramian_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimumMetrics {
    #[serde(rename = "J")]
    pub j: f64,
    pub slope: f64,
    pub curvature: Option<f64>,
    pub hessian_trace: f64,
    /// 2T·Tr μ², the trace expected at a global optimum.
    pub hessian_trace_expected: f64,
    pub signature: HessianSignature,
    pub refined: Option<RefinedCensus>,
}

/// Hessian census at the critical point reached by [`refine_critical_point`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedCensus {
    #[serde(rename = "J")]
    pub j: f64,
    pub slope: f64,
    pub iterations: usize,
    pub signature: HessianSignature,
    /// (h₊, h₋, h₀) among the N² spanned directions.
    pub non_null: (usize, usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleAnalysis {
    #[serde(flatten)]
    pub record: SaddleRecord,
    pub step: usize,
    pub signature: HessianSignature,
    pub refined: Option<RefinedCensus>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSnapshot {
    pub label: String,
    pub peaks_above_fraction: usize,
    pub spectrum: FieldSpectrum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub schema_version: u32,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J_final")]
    pub j_final: f64,
    pub converged: bool,
    pub milestones: Vec<MilestoneMetrics>,
    pub optimum: Option<OptimumMetrics>,
    pub saddle: Option<SaddleAnalysis>,
    pub traces: Vec<MetricRecord>,
    pub spectra: Vec<SpectrumSnapshot>,
    pub lie: Option<LieAnalysis>,
    /// Quantities that could not be produced, with the reason.
    pub gaps: Vec<String>,
}

impl LandscapeReport {
    pub fn milestone(&self, label: &str) -> Option<&MilestoneMetrics> {
        self.milestones.iter().find(|m| m.label == label)
    }

    pub fn spectrum(&self, label: &str) -> Option<&SpectrumSnapshot> {
        self.spectra.iter().find(|s| s.label == label)
    }
}

/// 𝒢 below which a refined point counts as critical.
pub const REFINE_SLOPE_TOL: f64 = 1e-9;
const REFINE_MAX_ITERATIONS: usize = 40;

fn signature_at(system: &ControlSystem, target: &TargetGate, field: &ControlField) -> Result<HessianSignature> {
    let traj = propagate(system, field)?;
    let kernel = hessian_kernel(&traj, &dipole_in_time(system, &traj), target)?;
    Ok(hessian_signature(&kernel, DEFAULT_ZERO_FACTOR))
}

/// Census at the nearest exact critical point, or a gap if refinement stalls.
pub fn refined_census(
    system: &ControlSystem,
    target: &TargetGate,
    field: &ControlField,
) -> Result<std::result::Result<RefinedCensus, String>> {
    let r = refine_critical_point(system, target, field, REFINE_SLOPE_TOL, REFINE_MAX_ITERATIONS)?;
    if !r.converged {
        return Ok(Err(format!(
            "refinement stopped at slope {:.3e} after {} iterations",
            r.slope, r.iterations
        )));
    }
    let signature = signature_at(system, target, &r.field)?;
    Ok(Ok(RefinedCensus {
        j: r.j,
        slope: r.slope,
        iterations: r.iterations,
        non_null: signature.non_null(system.dim()),
        signature,
    }))
}

/// Recomputes diagnostics at each recorded checkpoint of `run`.
pub fn landscape_profile(
    system: &ControlSystem,
    target: &TargetGate,
    run: &OptimizationRun,
    options: ProfileOptions,
) -> Result<LandscapeReport> {
    let n = system.dim();
    let t_final = run.grid.t_final();
    let bound = slope_bound(n, t_final, system.dipole().matrix());
    let mut gaps = Vec::new();
    let mut labels: Vec<String> = vec!["initial".into()];
    labels.extend(MILESTONES.iter().map(|&m| milestone_label(m)));
    labels.push("final".into());

    let mut milestones = Vec::new();
    for label in &labels {
        let Some(cp) = run.checkpoint(label) else {
            gaps.push(format!("{label}: milestone not reached"));
            continue;
        };
        let field = ControlField::new(run.grid, cp.field.clone())?;
        let (value, grad) = evaluate(system, target, &field)?;
        let slope = slope_metric(&grad);
        let saddle = match saddle_metric(&value.u_final, target, value.value.j) {
            Ok(s) => Some(s),
            Err(e) => {
                gaps.push(format!("{label}: saddle metric {e}"));
                None
            }
        };
        let path_ratio = if label == "initial" {
            None
        } else {
            match run.path_ratio_at(label) {
                Ok(r) => Some(r),
                Err(e) => {
                    gaps.push(format!("{label}: path ratio {e}"));
                    None
                }
            }
        };
        let (gramian_condition, gramian_rank) = if options.gramian {
            let traj = propagate(system, &field)?;
            let g = gramian(&dipole_in_time(system, &traj), &value.u_final)?;
            (Some(g.condition_number), Some(g.rank))
        } else {
            (None, None)
        };
        milestones.push(MilestoneMetrics {
            label: label.clone(),
            j: value.value.j,
            step: cp.step,
            slope,
            slope_fraction: slope / bound,
            saddle,
            path_ratio,
            gramian_condition,
            gramian_rank,
        });
    }
    if !options.gramian {
        gaps.push("gramian: disabled".into());
    }

    let optimum = if options.hessian {
        let field = run.final_field();
        let traj = propagate(system, &field)?;
        let dipole = dipole_in_time(system, &traj);
        let kernel = hessian_kernel(&traj, &dipole, target)?;
        let (value, grad) = evaluate(system, target, &field)?;
        let curvature = match local_curvature(&kernel, &grad) {
            Ok(c) => Some(c),
            Err(e) => {
                gaps.push(format!("curvature: {e}"));
                None
            }
        };
        let mu = system.dipole().matrix();
        let refined = if options.refine {
            refined_census(system, target, &field)?.map_err(|e| gaps.push(format!("optimum: {e}"))).ok()
        } else {
            None
        };
        Some(OptimumMetrics {
            j: value.value.j,
            slope: slope_metric(&grad),
            curvature,
            hessian_trace: hessian_trace(&kernel),
            hessian_trace_expected: 2.0 * t_final * mu.matmul(mu).trace().re,
            signature: hessian_signature(&kernel, DEFAULT_ZERO_FACTOR),
            refined,
        })
    } else {
        gaps.push("hessian: disabled".into());
        None
    };

    let saddle = match (&run.saddle, options.hessian) {
        (Some(snap), true) => {
            let field = ControlField::new(run.grid, snap.field.clone())?;
            let refined = if options.refine {
                refined_census(system, target, &field)?.map_err(|e| gaps.push(format!("saddle: {e}"))).ok()
            } else {
                None
            };
            Some(SaddleAnalysis {
                record: snap.record,
                step: snap.step,
                signature: signature_at(system, target, &field)?,
                refined,
            })
        }
        (None, _) => {
            gaps.push("saddle: no step came within the saddle band".into());
            None
        }
        (Some(_), false) => None,
    };

    if run.metric_traces.is_empty() {
        gaps.push("traces: metric traces were not recorded".into());
    }

    let spectra = SPECTRUM_LABELS
        .iter()
        .filter_map(|&label| match run.checkpoint(label) {
            Some(cp) => {
                let spectrum = fourier_spectrum(&ControlField::new(run.grid, cp.field.clone()).ok()?);
                Some(SpectrumSnapshot {
                    label: label.into(),
                    peaks_above_fraction: spectrum.count_above(SPECTRAL_PEAK_FRACTION),
                    spectrum,
                })
            }
            None => {
                gaps.push(format!("spectrum {label}: milestone not reached"));
                None
            }
        })
        .collect();

    let lie = if options.lie {
        Some(lie_closure(system.drift().matrix(), system.dipole().matrix(), DEFAULT_TOL)?)
    } else {
        None
    };

    Ok(LandscapeReport {
        schema_version: SCHEMA_VERSION,
        n,
        j_final: run.final_j(),
        converged: run.converged(),
        milestones,
        optimum,
        saddle,
        traces: run.metric_traces.clone(),
        spectra,
        lie,
        gaps,
    })
}

/// Milestone table of a report as CSV.
pub fn write_milestones_csv(path: impl AsRef<Path>, report: &LandscapeReport) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for m in &report.milestones {
        w.serialize(m)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Flat CSV form of [`StatsSummary`]; empty cells mean "not defined".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub seeds: usize,
    pub completed: usize,
    pub failed: usize,
    pub converged: usize,
    pub convergence_fraction: f64,
    pub mean_effort: Option<f64>,
    pub std_effort_population: Option<f64>,
    pub saddle_lt_0_1_count: usize,
    pub saddle_lt_0_1_fraction: f64,
    pub saddle_lt_0_1_mean_effort: Option<f64>,
    pub saddle_lt_0_05_count: usize,
    pub saddle_lt_0_05_fraction: f64,
    pub saddle_lt_0_05_mean_effort: Option<f64>,
    pub saddle_lt_0_01_count: usize,
    pub saddle_lt_0_01_fraction: f64,
    pub saddle_lt_0_01_mean_effort: Option<f64>,
}

impl From<&StatsSummary> for SummaryRow {
    fn from(s: &StatsSummary) -> Self {
        let f = |i: usize| s.saddle.get(i).copied().unwrap_or(SaddleFraction {
            threshold: SADDLE_THRESHOLDS[i],
            count: 0,
            fraction: 0.0,
            mean_effort: None,
        });
        let (a, b, c) = (f(0), f(1), f(2));
        Self {
            n: s.n,
            seeds: s.seeds,
            completed: s.completed,
            failed: s.failed,
            converged: s.converged,
            convergence_fraction: s.convergence_fraction,
            mean_effort: s.mean_effort,
            std_effort_population: s.std_effort,
            saddle_lt_0_1_count: a.count,
            saddle_lt_0_1_fraction: a.fraction,
            saddle_lt_0_1_mean_effort: a.mean_effort,
            saddle_lt_0_05_count: b.count,
            saddle_lt_0_05_fraction: b.fraction,
            saddle_lt_0_05_mean_effort: b.mean_effort,
            saddle_lt_0_01_count: c.count,
            saddle_lt_0_01_fraction: c.fraction,
            saddle_lt_0_01_mean_effort: c.mean_effort,
        }
    }
}

impl From<&SummaryRow> for StatsSummary {
    fn from(r: &SummaryRow) -> Self {
        let cells = [
            (r.saddle_lt_0_1_count, r.saddle_lt_0_1_fraction, r.saddle_lt_0_1_mean_effort),
            (r.saddle_lt_0_05_count, r.saddle_lt_0_05_fraction, r.saddle_lt_0_05_mean_effort),
            (r.saddle_lt_0_01_count, r.saddle_lt_0_01_fraction, r.saddle_lt_0_01_mean_effort),
        ];
        Self {
            n: r.n,
            seeds: r.seeds,
            completed: r.completed,
            failed: r.failed,
            converged: r.converged,
            convergence_fraction: r.convergence_fraction,
            mean_effort: r.mean_effort,
            std_effort: r.std_effort_population,
            saddle: SADDLE_THRESHOLDS
                .iter()
                .zip(cells)
                .map(|(&threshold, (count, fraction, mean_effort))| SaddleFraction {
                    threshold,
                    count,
                    fraction,
                    mean_effort,
                })
                .collect(),
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn write_summary_csv(path: impl AsRef<Path>, summaries: &[StatsSummary]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    if summaries.is_empty() {
        // serde only emits headers with the first row
        w.write_record(summary_header())?;
    }
    for s in summaries {
        w.serialize(SummaryRow::from(s))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn summary_header() -> Vec<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(SummaryRow::from(&StatsSummary::from_outcomes(0, &[]))).expect("in-memory csv");
    let bytes = w.into_inner().expect("in-memory csv");
    let text = String::from_utf8(bytes).expect("csv is utf-8");
    text.lines().next().unwrap_or_default().split(',').map(str::to_owned).collect()
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<StatsSummary>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    r.deserialize::<SummaryRow>()
        .map(|row| Ok(StatsSummary::from(&row?)))
        .collect()
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Reads a run file written by [`write_batch`] or by a single `optimize` call.
pub fn read_run(path: impl AsRef<Path>) -> Result<RunRecord> {
    let path = path.as_ref();
    match read_json::<RunOutcome>(path) {
        Ok(RunOutcome::Completed(r)) => Ok(*r),
        Ok(RunOutcome::Failed { error, .. }) => Err(Error::Parse {
            context: path.display().to_string(),
            message: format!("run failed: {error}"),
        }),
        Err(_) => read_json::<RunRecord>(path),
    }
}

/// `omega,magnitude` rows.
pub fn write_spectrum_csv(path: impl AsRef<Path>, spectrum: &FieldSpectrum) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["omega", "magnitude"])?;
    for (f, m) in spectrum.frequencies.iter().zip(&spectrum.magnitudes) {
        w.write_record([f.to_string(), m.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_spectrum_csv(path: impl AsRef<Path>) -> Result<FieldSpectrum> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let mut s = FieldSpectrum {
        frequencies: Vec::new(),
        magnitudes: Vec::new(),
    };
    for row in r.deserialize::<(f64, f64)>() {
        let (f, m) = row?;
        s.frequencies.push(f);
        s.magnitudes.push(m);
    }
    Ok(s)
}

/// Spectra of the initial, J=1 and final fields that the run reached.
pub fn run_spectra(run: &OptimizationRun) -> Vec<(&'static str, FieldSpectrum)> {
    SPECTRUM_LABELS
        .iter()
        .filter_map(|&label| {
            let cp = run.checkpoint(label)?;
            let field = ControlField::new(run.grid, cp.field.clone()).ok()?;
            Some((label, fourier_spectrum(&field)))
        })
        .collect()
}

pub fn run_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join("runs").join(format!("{seed}.json"))
}

pub fn spectrum_path(dir: &Path, seed: u64, label: &str) -> PathBuf {
    dir.join("spectra").join(format!("{seed}_{label}.csv"))
}

/// Writes `summary.csv`, one JSON file per seed and the milestone spectra.
pub fn write_batch(dir: impl AsRef<Path>, batch: &BatchResult) -> Result<()> {
    let dir = dir.as_ref();
    create_dir(&dir.join("runs"))?;
    create_dir(&dir.join("spectra"))?;
    write_summary_csv(dir.join("summary.csv"), std::slice::from_ref(&batch.summary))?;
    for outcome in &batch.outcomes {
        write_json(run_path(dir, outcome.seed()), outcome)?;
        if let Some(r) = outcome.record() {
            for (label, s) in run_spectra(&r.run) {
                write_spectrum_csv(spectrum_path(dir, r.seed, label), &s)?;
            }
        }
    }
    Ok(())
}

/// Reads every `runs/*.json` below `dir`, sorted by seed.
pub fn read_batch_runs(dir: impl AsRef<Path>) -> Result<Vec<RunOutcome>> {
    let runs = dir.as_ref().join("runs");
    let mut out = Vec::new();
    for entry in fs::read_dir(&runs).map_err(|e| Error::io(&runs, e))? {
        let path = entry.map_err(|e| Error::io(&runs, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            out.push(read_json::<RunOutcome>(&path)?);
        }
    }
    out.sort_by_key(RunOutcome::seed);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub seeds: usize,
    pub converged: usize,
    pub mean_effort: Option<f64>,
    pub std_effort_population: Option<f64>,
    /// Same value on every row; empty when undefined.
    pub log_effort_slope: Option<f64>,
}

/// `scaling.csv` plus one `N<n>/` batch directory per dimension.
pub fn write_scaling(dir: impl AsRef<Path>, study: &ScalingStudy, batches: &[BatchResult]) -> Result<()> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    for b in batches {
        write_batch(dir.join(format!("N{}", b.summary.n)), b)?;
    }
    let path = dir.join("scaling.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for s in &study.summaries {
        w.serialize(ScalingRow {
            n: s.n,
            seeds: s.seeds,
            converged: s.converged,
            mean_effort: s.mean_effort,
            std_effort_population: s.std_effort,
            log_effort_slope: study.log_effort_slope,
        })?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}

pub fn read_scaling_csv(path: impl AsRef<Path>) -> Result<Vec<ScalingRow>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::batch::run_batch;
    use crate::harness::config::ExperimentConfig;

    fn config(seeds: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.experiment.seeds = seeds;
        c.experiment.seed = 40;
        c.metrics.metrics = true;
        c
    }

    #[test]
    fn batch_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let b = run_batch(&config(3), 2).unwrap();
        write_batch(dir.path(), &b).unwrap();
        let summaries = read_summary_csv(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summaries, vec![b.summary.clone()]);
        let runs = read_batch_runs(dir.path()).unwrap();
        assert_eq!(StatsSummary::from_outcomes(2, &runs), b.summary);
        let rec = read_run(run_path(dir.path(), 41)).unwrap();
        assert_eq!(rec.run.j_trace, b.outcomes[1].record().unwrap().run.j_trace);
        let s = read_spectrum_csv(spectrum_path(dir.path(), 40, "final")).unwrap();
        assert_eq!(s, fourier_spectrum(&b.outcomes[0].record().unwrap().run.final_field()));
    }

    #[test]
    fn csv_text_round_trips() {
        let b = run_batch(&config(2), 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_summary_csv(&p, &[b.summary.clone()]).unwrap();
        let first = fs::read_to_string(&p).unwrap();
        let back = read_summary_csv(&p).unwrap();
        write_summary_csv(&p, &back).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), first);
        assert!(first.starts_with("N,seeds,"));
        assert!(first.contains("std_effort_population"));
    }

    #[test]
    fn empty_summary_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_summary_csv(&p, &[]).unwrap();
        assert!(fs::read_to_string(&p).unwrap().starts_with("N,seeds,"));
        assert!(read_summary_csv(&p).unwrap().is_empty());
    }

    #[test]
    fn profile_of_converged_run() {
        let c = config(1);
        let b = run_batch(&c, 2).unwrap();
        let rec = b.outcomes[0].record().unwrap();
        let sys = rec.system().unwrap();
        let w = rec.target_gate().unwrap();
        let report = landscape_profile(&sys, &w, &rec.run, ProfileOptions::default()).unwrap();
        assert!(report.converged);
        let fin = report.milestone("final").unwrap();
        let init = report.milestone("initial").unwrap();
        assert!(fin.slope < 1e-2 * init.slope);
        let opt = report.optimum.as_ref().unwrap();
        let rel = (opt.hessian_trace - opt.hessian_trace_expected).abs() / opt.hessian_trace_expected;
        assert!(rel < 1e-2, "{rel}");
        assert_eq!(opt.refined.as_ref().unwrap().non_null, (4, 0, 0));
        assert!(fin.path_ratio.unwrap() >= 1.0);
        assert_eq!(report.lie.as_ref().unwrap().rank, 4);
        assert!(!report.traces.is_empty());
        assert_eq!(report.spectra.len() + report.gaps.iter().filter(|g| g.starts_with("spectrum")).count(), 3);
        let json = serde_json::to_string(&report).unwrap();
        let back: LandscapeReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn missing_traces_leave_gaps() {
        let mut c = config(1);
        c.metrics.metrics = false;
        let b = run_batch(&c, 2).unwrap();
        let rec = b.outcomes[0].record().unwrap();
        let opts = ProfileOptions {
            gramian: false,
            hessian: false,
            lie: false,
            refine: false,
        };
        let report = landscape_profile(&rec.system().unwrap(), &rec.target_gate().unwrap(), &rec.run, opts).unwrap();
        assert!(report.optimum.is_none());
        assert!(report.gaps.iter().any(|g| g.starts_with("traces")));
        assert!(report.gaps.iter().any(|g| g.starts_with("hessian")));
        assert!(report.milestones.iter().all(|m| m.gramian_condition.is_none()));
    }
}
