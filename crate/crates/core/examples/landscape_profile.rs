//! Full landscape report for one run, as `ucl landscape` would write it.

use unitary_landscape::harness::batch::run_single;
use unitary_landscape::harness::report::{write_json, write_milestones_csv};
use unitary_landscape::harness::{landscape_profile, ExperimentConfig, ProfileOptions};

fn main() -> unitary_landscape::Result<()> {
    let (n, seed) = (3, 5);
    let mut config = ExperimentConfig::default();
    config.experiment.n = vec![n];
    config.metrics.metrics = true;
    let record = run_single(&config, n, seed)?;

    let report = landscape_profile(&record.system()?, &record.target_gate()?, &record.run, ProfileOptions::default())?;
    println!("N = {}, final J = {:.2e}, converged {}", report.n, report.j_final, report.converged);
    println!("{:<8} {:>9} {:>6} {:>9} {:>8} {:>8} {:>10}", "label", "J", "step", "slope", "frac", "R", "cond G");
    for m in &report.milestones {
        println!(
            "{:<8} {:>9.2e} {:>6} {:>9.3} {:>8.4} {:>8} {:>10}",
            m.label,
            m.j,
            m.step,
            m.slope,
            m.slope_fraction,
            m.path_ratio.map_or("-".into(), |r| format!("{r:.3}")),
            m.gramian_condition.map_or("-".into(), |c| format!("{c:.2e}")),
        );
    }
    if let Some(opt) = &report.optimum {
        println!(
            "optimum: trace {:.4} vs {:.4}; refined census {:?}",
            opt.hessian_trace,
            opt.hessian_trace_expected,
            opt.refined.as_ref().map(|r| r.non_null)
        );
    }
    if let Some(lie) = &report.lie {
        println!("Lie rank {} at depth {}", lie.rank, lie.depth);
    }
    for gap in &report.gaps {
        println!("not computed: {gap}");
    }

    let dir = std::env::temp_dir();
    write_json(dir.join("landscape_profile.json"), &report)?;
    write_milestones_csv(dir.join("landscape_profile.milestones.csv"), &report)?;
    println!("report written to {}", dir.display());
    Ok(())
}
