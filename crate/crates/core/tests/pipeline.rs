//! Configuration file to batch output and back.

use unitary_landscape::harness::batch::StatsSummary;
use unitary_landscape::harness::report::{
    read_batch_runs, read_run, read_scaling_csv, read_spectrum_csv, read_summary_csv, run_path, run_spectra,
    spectrum_path, write_batch, write_scaling,
};
use unitary_landscape::harness::{run_batch, scaling_study, ExperimentConfig};

const CONFIG: &str = r#"
[system]
drift = "rotor"
dipole = "d"
coupling = 0.9

[experiment]
N = [2]
seeds = 3
seed = 40
workers = 1

[optimizer]
threshold = 1e-3
"#;

fn config(dir: &std::path::Path) -> ExperimentConfig {
    let path = dir.join("exp.toml");
    std::fs::write(&path, CONFIG).unwrap();
    ExperimentConfig::load(&path).unwrap()
}

#[test]
fn batch_files_reproduce_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path());
    assert_eq!(c.system.coupling, 0.9);
    let batch = run_batch(&c, 2).unwrap();
    assert_eq!(batch.summary.converged, 3);

    let out = dir.path().join("out");
    write_batch(&out, &batch).unwrap();

    let summaries = read_summary_csv(out.join("summary.csv")).unwrap();
    assert_eq!(summaries, vec![batch.summary.clone()]);

    let outcomes = read_batch_runs(&out).unwrap();
    assert_eq!(outcomes.len(), 3);
    assert_eq!(StatsSummary::from_outcomes(2, &outcomes), batch.summary);

    for o in &batch.outcomes {
        let r = o.record().unwrap();
        let back = read_run(run_path(&out, r.seed)).unwrap();
        assert_eq!(back.run.j_trace, r.run.j_trace);
        assert_eq!(back.run.final_field().samples(), r.run.final_field().samples());
        for (label, s) in run_spectra(&r.run) {
            let read = read_spectrum_csv(spectrum_path(&out, r.seed, label)).unwrap();
            assert_eq!(read, s);
        }
    }
}

#[test]
fn rerun_from_saved_config_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path());
    let first = run_batch(&c, 2).unwrap();
    let out = dir.path().join("out");
    write_batch(&out, &first).unwrap();

    // The record carries its own configuration.
    let saved = read_run(run_path(&out, 41)).unwrap();
    let again = run_batch(&saved.config, 2).unwrap();
    assert_eq!(again.summary, first.summary);
}

#[test]
fn scaling_layout() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.experiment.n = vec![2, 3];
    c.experiment.seeds = 2;
    let (study, batches) = scaling_study(&c).unwrap();
    let out = dir.path().join("scaling");
    write_scaling(&out, &study, &batches).unwrap();

    let rows = read_scaling_csv(out.join("scaling.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 3]);
    assert!(rows.iter().all(|r| r.log_effort_slope == study.log_effort_slope));
    for n in [2, 3] {
        assert!(out.join(format!("N{n}/summary.csv")).exists());
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[system]\ndrfit = \"rotor\"\n").unwrap();
    assert!(ExperimentConfig::load(&path).is_err());
}
