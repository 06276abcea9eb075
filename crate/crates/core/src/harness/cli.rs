//! The `ucl` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use super::batch::{run_batch, run_single, scaling_study, RunOutcome};
use super::config::ExperimentConfig;
use super::report::{
    landscape_profile, read_run, run_path, run_spectra, spectrum_path, write_batch, write_json, write_milestones_csv,
    write_scaling, write_spectrum_csv, ProfileOptions, SPECTRAL_PEAK_FRACTION,
};
use crate::error::Error;
use crate::fields::{fourier_spectrum, initial_field, read_field_csv};
use crate::lie::{lie_closure, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ucl", version, about = "Unitary gate control and landscape diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One optimization; writes runs/<seed>.json and its spectra.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
    },
    /// `seeds` runs at one N; writes summary.csv, runs/ and spectra/.
    Batch {
        #[command(flatten)]
        common: Common,
        /// Seed of the first run; run i uses seed + i.
        #[arg(long)]
        seed: u64,
    },
    /// One batch per N plus the log-effort slope.
    Scaling {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
    },
    /// Profile a saved run file.
    Landscape {
        run: PathBuf,
        /// Report path; defaults to the run file with a `.landscape.json` suffix.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_gramian: bool,
        #[arg(long)]
        no_hessian: bool,
        #[arg(long)]
        no_refine: bool,
        #[arg(long)]
        no_lie: bool,
    },
    /// Dynamical Lie algebra of the configured system.
    Lie {
        #[command(flatten)]
        common: Common,
        /// Seed for randomized dipoles (sign patterns, sparse layouts).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fourier spectra of a run's milestone fields, a field CSV, or a synthesized initial field.
    Spectra {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "field")]
        run: Option<PathBuf>,
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Flags mirroring the configuration file; each overrides the loaded value.
#[derive(Debug, Args)]
struct Common {
    /// Sectioned `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    drift: Option<String>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    anharmonicity: Option<f64>,
    #[arg(long)]
    drift_file: Option<PathBuf>,
    #[arg(long)]
    dipole: Option<String>,
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long)]
    bands: Option<usize>,
    #[arg(long)]
    fraction: Option<f64>,
    /// Scale of the dipole entries.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dipole_file: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    target_file: Option<PathBuf>,
    /// Dimension(s), comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Allow N above the standard suite.
    #[arg(long)]
    expensive: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Square root of the initial fluence.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    components: Option<usize>,
    #[arg(long)]
    spacing: Option<String>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    fluence_penalty: Option<f64>,
    /// PMP mixing weight.
    #[arg(long)]
    pmp_alpha: Option<f64>,
    /// PMP step (negative).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Record slope and saddle traces at every step.
    #[arg(long)]
    metrics: bool,
    /// Record the Gramian condition number at every step.
    #[arg(long)]
    record_gramian: bool,
    /// Keep every accepted field in the run file.
    #[arg(long)]
    record_fields: bool,
}

fn parse_choice<T: DeserializeOwned>(flag: &str, value: &str) -> Result<T, Error> {
    serde_json::from_value(serde_json::Value::String(value.to_ascii_lowercase()))
        .map_err(|_| Error::Config(format!("--{flag}: unknown value `{value}`")))
}

impl Common {
    fn resolve(&self, seed: u64) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        if let Some(v) = &self.drift {
            c.system.drift = parse_choice("drift", v)?;
        }
        if let Some(v) = &self.dipole {
            c.system.dipole = parse_choice("dipole", v)?;
        }
        if let Some(v) = &self.target {
            c.target.kind = parse_choice("target", v)?;
        }
        if let Some(v) = &self.spacing {
            c.field.spacing = parse_choice("spacing", v)?;
        }
        if let Some(v) = &self.algorithm {
            c.optimizer.algorithm = parse_choice("algorithm", v)?;
        }
        set!(self.omega => c.system.omega);
        set!(self.anharmonicity => c.system.anharmonicity);
        set!(self.coupling => c.system.coupling);
        set!(self.bands => c.system.bands);
        set!(self.fraction => c.system.fraction);
        set!(self.alpha => c.system.alpha);
        set!(self.n => c.experiment.n);
        set!(self.seeds => c.experiment.seeds);
        set!(self.output => c.experiment.output);
        set!(self.amplitude => c.field.amplitude);
        set!(self.components => c.field.components);
        set!(self.threshold => c.optimizer.threshold);
        set!(self.rel_tol => c.optimizer.rel_tol);
        set!(self.abs_tol => c.optimizer.abs_tol);
        set!(self.fluence_penalty => c.optimizer.fluence_penalty);
        set!(self.pmp_alpha => c.optimizer.alpha);
        if self.drift_file.is_some() {
            c.system.drift_file = self.drift_file.clone();
        }
        if self.dipole_file.is_some() {
            c.system.dipole_file = self.dipole_file.clone();
        }
        if self.target_file.is_some() {
            c.target.file = self.target_file.clone();
        }
        if self.t_final.is_some() {
            c.experiment.t_final = self.t_final;
        }
        if self.n_points.is_some() {
            c.experiment.n_points = self.n_points;
        }
        if self.workers.is_some() {
            c.experiment.workers = self.workers;
        }
        if self.max_iterations.is_some() {
            c.optimizer.max_iterations = self.max_iterations;
        }
        if self.beta.is_some() {
            c.optimizer.beta = self.beta;
        }
        c.experiment.expensive |= self.expensive;
        c.metrics.metrics |= self.metrics;
        c.metrics.gramian |= self.record_gramian;
        c.metrics.fields |= self.record_fields;
        c.experiment.seed = seed;
        c.validate()?;
        Ok(c)
    }
}

fn single_n(c: &ExperimentConfig, command: &str) -> Result<usize, Error> {
    match c.experiment.n.as_slice() {
        [n] => Ok(*n),
        _ => Err(Error::Config(format!("`{command}` takes exactly one N (use `scaling` for several)"))),
    }
}

/// An error tagged with the exit code it maps to.
struct Failure(i32, Error);

fn config_err(e: Error) -> Failure {
    Failure(EXIT_CONFIG, e)
}

fn runtime_err(e: Error) -> Failure {
    Failure(EXIT_RUNTIME, e)
}

fn io_err(e: std::io::Error) -> Failure {
    Failure(EXIT_RUNTIME, Error::io("<stdout>", e))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

/// Parses `args` (program name first) and runs the command, writing results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure(code, e)) => {
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Optimize { common, seed } => {
            let c = common.resolve(seed).map_err(config_err)?;
            let n = single_n(&c, "optimize").map_err(config_err)?;
            let record = run_single(&c, n, seed).map_err(runtime_err)?;
            let dir = &c.experiment.output;
            let path = run_path(dir, seed);
            let write = || -> Result<(), Error> {
                std::fs::create_dir_all(dir.join("runs")).map_err(|e| Error::io(dir, e))?;
                std::fs::create_dir_all(dir.join("spectra")).map_err(|e| Error::io(dir, e))?;
                write_json(&path, &RunOutcome::Completed(Box::new(record.clone())))?;
                for (label, s) in run_spectra(&record.run) {
                    write_spectrum_csv(spectrum_path(dir, seed, label), &s)?;
                }
                Ok(())
            };
            write().map_err(runtime_err)?;
            let r = &record.run;
            writeln!(
                out,
                "N={n} seed={seed} status={:?} J={:.3e} effort={} rejected={}\nwrote {}",
                r.status,
                r.final_j(),
                r.effort,
                r.rejected,
                path.display()
            )
            .map_err(io_err)
        }
        Command::Batch { common, seed } => {
            let c = common.resolve(seed).map_err(config_err)?;
            let n = single_n(&c, "batch").map_err(config_err)?;
            let b = run_batch(&c, n).map_err(runtime_err)?;
            write_batch(&c.experiment.output, &b).map_err(runtime_err)?;
            let s = &b.summary;
            writeln!(
                out,
                "N={} seeds={} converged={} failed={} mean_effort={} std_effort_population={}",
                s.n,
                s.seeds,
                s.converged,
                s.failed,
                fmt_opt(s.mean_effort),
                fmt_opt(s.std_effort)
            )
            .map_err(io_err)?;
            for f in &s.saddle {
                writeln!(
                    out,
                    "  S<{}: fraction={:.3} mean_effort={}",
                    f.threshold,
                    f.fraction,
                    fmt_opt(f.mean_effort)
                )
                .map_err(io_err)?;
            }
            writeln!(out, "wrote {}", c.experiment.output.join("summary.csv").display()).map_err(io_err)
        }
        Command::Scaling { common, seed } => {
            let c = common.resolve(seed).map_err(config_err)?;
            let (study, batches) = scaling_study(&c).map_err(runtime_err)?;
            write_scaling(&c.experiment.output, &study, &batches).map_err(runtime_err)?;
            for s in &study.summaries {
                writeln!(
                    out,
                    "N={:<3} seeds={} converged={} mean_effort={} std_effort_population={}",
                    s.n,
                    s.seeds,
                    s.converged,
                    fmt_opt(s.mean_effort),
                    fmt_opt(s.std_effort)
                )
                .map_err(io_err)?;
            }
            let slope = study.log_effort_slope.map_or_else(|| "absent".into(), |v| format!("{v:.4}"));
            writeln!(out, "ln(effort) slope per unit N: {slope}").map_err(io_err)
        }
        Command::Landscape {
            run,
            out: report_path,
            no_gramian,
            no_hessian,
            no_refine,
            no_lie,
        } => {
            let record = read_run(&run).map_err(config_err)?;
            let system = record.system().map_err(config_err)?;
            let target = record.target_gate().map_err(config_err)?;
            let options = ProfileOptions {
                gramian: !no_gramian,
                hessian: !no_hessian,
                lie: !no_lie,
                refine: !no_refine,
            };
            let report = landscape_profile(&system, &target, &record.run, options).map_err(runtime_err)?;
            let path = report_path.unwrap_or_else(|| with_suffix(&run, ".landscape.json"));
            write_json(&path, &report).map_err(runtime_err)?;
            let csv = with_suffix(&path, ".milestones.csv");
            write_milestones_csv(&csv, &report).map_err(runtime_err)?;
            for m in &report.milestones {
                writeln!(
                    out,
                    "{:<8} J={:.4e} G={:.4e} S={} R={} cond={}",
                    m.label,
                    m.j,
                    m.slope,
                    m.saddle.map_or("-".into(), |v| format!("{v:.4}")),
                    m.path_ratio.map_or("-".into(), |v| format!("{v:.4}")),
                    m.gramian_condition.map_or("-".into(), |v| format!("{v:.3e}")),
                )
                .map_err(io_err)?;
            }
            if let Some(o) = &report.optimum {
                let s = o.signature;
                writeln!(
                    out,
                    "optimum: trace={:.6e} expected={:.6e} signature=({}, {}, {})",
                    o.hessian_trace, o.hessian_trace_expected, s.n_positive, s.n_negative, s.n_zero
                )
                .map_err(io_err)?;
            }
            for g in &report.gaps {
                writeln!(out, "gap: {g}").map_err(io_err)?;
            }
            writeln!(out, "wrote {}", path.display()).map_err(io_err)
        }
        Command::Lie { common, seed } => {
            let c = common.resolve(seed).map_err(config_err)?;
            let n = single_n(&c, "lie").map_err(config_err)?;
            let system = c.system(n, seed).map_err(config_err)?;
            let a = lie_closure(system.drift().matrix(), system.dipole().matrix(), DEFAULT_TOL).map_err(runtime_err)?;
            writeln!(
                out,
                "rank {}\ndepth {}\n{}\nbasis dimension by level: {:?}",
                a.rank,
                a.depth,
                if a.controllable { "controllable" } else { "not controllable" },
                a.basis_dim_by_level
            )
            .map_err(io_err)
        }
        Command::Spectra {
            common,
            run,
            field,
            seed,
        } => {
            let c = common.resolve(seed).map_err(config_err)?;
            let dir = c.experiment.output.join("spectra");
            std::fs::create_dir_all(&dir).map_err(|e| runtime_err(Error::io(&dir, e)))?;
            let spectra = if let Some(path) = run {
                let record = read_run(&path).map_err(config_err)?;
                run_spectra(&record.run)
                    .into_iter()
                    .map(|(label, s)| (format!("{}_{label}", record.seed), s))
                    .collect()
            } else if let Some(path) = field {
                let f = read_field_csv(&path).map_err(config_err)?;
                let stem = path.file_stem().map_or("field".into(), |s| s.to_string_lossy().into_owned());
                vec![(stem, fourier_spectrum(&f))]
            } else {
                let n = single_n(&c, "spectra").map_err(config_err)?;
                let system = c.system(n, seed).map_err(config_err)?;
                let grid = c.grid(&system).map_err(config_err)?;
                let f = initial_field(&grid, &c.field_params(), seed, &system).map_err(runtime_err)?;
                vec![(format!("{seed}_initial"), fourier_spectrum(&f))]
            };
            for (name, s) in &spectra {
                let path = dir.join(format!("{name}.csv"));
                write_spectrum_csv(&path, s).map_err(runtime_err)?;
                writeln!(
                    out,
                    "{name}: {} bins above {:.0}% of peak -> {}",
                    s.count_above(SPECTRAL_PEAK_FRACTION),
                    SPECTRAL_PEAK_FRACTION * 100.0,
                    path.display()
                )
                .map_err(io_err)?;
            }
            Ok(())
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or("report".into(), |s| s.to_string_lossy().into_owned());
    let stem = stem.strip_suffix(".landscape").unwrap_or(&stem).to_owned();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Entry point for the binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ucl").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn lie_flat_rotor() {
        let (code, out, _) = call(&["lie", "--drift", "rotor", "--dipole", "flat", "--N", "4"]);
        assert_eq!(code, 0);
        assert!(out.contains("rank 16"), "{out}");
        assert!(out.contains("\ncontrollable"));
    }

    #[test]
    fn usage_and_config_errors_exit_1() {
        assert_eq!(call(&["optimize", "--N", "2"]).0, EXIT_CONFIG, "missing --seed");
        assert_eq!(call(&["lie", "--bogus"]).0, EXIT_CONFIG);
        assert_eq!(call(&["lie", "--dipole", "nope"]).0, EXIT_CONFIG);
        assert_eq!(call(&["lie", "--N", "1"]).0, EXIT_CONFIG);
        assert_eq!(call(&["batch", "--seed", "0", "--N", "2,4"]).0, EXIT_CONFIG);
        assert_eq!(call(&["landscape", "/nonexistent/run.json"]).0, EXIT_CONFIG);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn empty_batch_exits_0() {
        let dir = tempfile::tempdir().unwrap();
        let o = dir.path().to_str().unwrap();
        let (code, out, err) = call(&["batch", "--seed", "0", "--seeds", "0", "--output", o]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("seeds=0"));
        assert!(dir.path().join("summary.csv").exists());
    }

    #[test]
    fn optimize_then_landscape_and_spectra() {
        let dir = tempfile::tempdir().unwrap();
        let o = dir.path().to_str().unwrap();
        let (code, out, err) = call(&["optimize", "--seed", "3", "--N", "2", "--threshold", "1e-6", "--output", o]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("status=Converged"), "{out}");
        let run = dir.path().join("runs/3.json");
        assert!(run.exists());
        let (code, out, err) = call(&["landscape", run.to_str().unwrap(), "--no-gramian"]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("optimum:"));
        assert!(dir.path().join("runs/3.landscape.json").exists());
        assert!(dir.path().join("runs/3.milestones.csv").exists());
        let (code, _, err) = call(&["spectra", "--run", run.to_str().unwrap(), "--output", o]);
        assert_eq!(code, 0, "{err}");
        assert!(dir.path().join("spectra/3_final.csv").exists());
    }
}
