//! Mean effort against N for a small seeded study, with the log-slope fit.

use unitary_landscape::harness::report::write_scaling;
use unitary_landscape::harness::{scaling_study, ExperimentConfig};

fn main() -> unitary_landscape::Result<()> {
    let mut config = ExperimentConfig::default();
    config.experiment.n = vec![2, 3, 4, 6];
    config.experiment.seeds = 8;
    config.optimizer.threshold = 1e-3;

    let (study, batches) = scaling_study(&config)?;
    println!("{:>3} {:>10} {:>12} {:>10}", "N", "converged", "mean effort", "std");
    for s in &study.summaries {
        println!(
            "{:>3} {:>7}/{:<2} {:>12.1} {:>10.1}",
            s.n,
            s.converged,
            s.seeds,
            s.mean_effort.unwrap_or(f64::NAN),
            s.std_effort.unwrap_or(f64::NAN)
        );
    }
    match study.log_effort_slope {
        Some(slope) => println!("d ln(effort) / dN = {slope:.3}"),
        None => println!("slope undefined"),
    }

    let dir = std::env::temp_dir().join("scaling_study");
    write_scaling(&dir, &study, &batches)?;
    println!("written to {}", dir.display());
    Ok(())
}
