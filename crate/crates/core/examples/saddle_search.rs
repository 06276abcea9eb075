//! Scan seeded N = 4 runs for close passes by the J = 4 saddle, then
//! refine the closest one onto the critical point and count its Hessian.
//!
//! cargo run --release --example saddle_search -- [seeds]

use unitary_landscape::fields::ControlField;
use unitary_landscape::harness::{run_batch, ExperimentConfig};
use unitary_landscape::landscape::{critical_census, hessian_signature, refine_critical_point, DEFAULT_ZERO_FACTOR};
use unitary_landscape::objective::hessian_kernel;
use unitary_landscape::propagation::{dipole_in_time, propagate};

fn main() -> unitary_landscape::Result<()> {
    let seeds: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(150);
    let n = 4;
    let mut config = ExperimentConfig::default();
    config.experiment.n = vec![n];
    config.experiment.seeds = seeds;

    let batch = run_batch(&config, n)?;
    let s = &batch.summary;
    println!("{} runs, {} converged", s.seeds, s.converged);
    for f in &s.saddle {
        println!("  S < {:<5} {:>4} runs ({:.1}%)", f.threshold, f.count, 100.0 * f.fraction);
    }

    let closest = batch
        .outcomes
        .iter()
        .filter_map(|o| o.record())
        .filter(|r| r.run.saddle.as_ref().is_some_and(|s| s.record.nearest_m == 1))
        .min_by(|a, b| {
            let s = |r: &&unitary_landscape::harness::RunRecord| r.run.saddle.as_ref().unwrap().record.s_min;
            s(a).total_cmp(&s(b))
        });
    let Some(record) = closest else {
        println!("no run came near the m = 1 saddle");
        return Ok(());
    };
    let snap = record.run.saddle.as_ref().unwrap();
    println!(
        "closest: seed {} at step {}, S = {:.4}, J = {:.4}",
        record.seed, snap.step, snap.record.s_min, snap.record.j_at_min
    );

    let system = record.system()?;
    let target = record.target_gate()?;
    let start = ControlField::new(record.run.grid, snap.field.clone())?;
    let refined = refine_critical_point(&system, &target, &start, 1e-9, 40)?;
    let traj = propagate(&system, &refined.field)?;
    let sig = hessian_signature(&hessian_kernel(&traj, &dipole_in_time(&system, &traj), &target)?, DEFAULT_ZERO_FACTOR);
    println!(
        "refined in {} steps to J = {:.6}: spanned census {:?}, expected {:?}",
        refined.iterations,
        refined.j,
        sig.non_null(n),
        critical_census(n, 1)
    );
    Ok(())
}
