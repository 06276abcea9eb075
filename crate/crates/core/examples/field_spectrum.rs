//! Spectral content of the field before and after optimization, next to
//! the drift's transition frequencies.

use unitary_landscape::fields::fourier_spectrum;
use unitary_landscape::harness::batch::run_single;
use unitary_landscape::harness::report::{run_spectra, SPECTRAL_PEAK_FRACTION};
use unitary_landscape::harness::ExperimentConfig;

fn main() -> unitary_landscape::Result<()> {
    let (n, seed) = (4, 11);
    let mut config = ExperimentConfig::default();
    config.experiment.n = vec![n];
    let record = run_single(&config, n, seed)?;

    let levels = &record.drift_levels;
    let mut transitions: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (levels[j] - levels[i]).abs()))
        .collect();
    transitions.sort_by(f64::total_cmp);
    println!("drift transitions: {transitions:?}");

    for (label, s) in run_spectra(&record.run) {
        let mut bins: Vec<(f64, f64)> = s.frequencies.iter().copied().zip(s.magnitudes.iter().copied()).collect();
        bins.sort_by(|a, b| b.1.total_cmp(&a.1));
        let top: Vec<String> = bins.iter().take(5).map(|(w, m)| format!("{w:.2} ({m:.1})")).collect();
        println!(
            "{label:>8}: {} bins above {:.0}% of peak; strongest {}",
            s.count_above(SPECTRAL_PEAK_FRACTION),
            100.0 * SPECTRAL_PEAK_FRACTION,
            top.join(", ")
        );
    }

    let final_field = record.run.final_field();
    let spectrum = fourier_spectrum(&final_field);
    let n_samples = final_field.samples().len();
    let energy: f64 = final_field.samples().iter().map(|x| x * x).sum();
    println!("Parseval check: {:.6e} vs {:.6e}", spectrum.parseval_sum(n_samples), energy);
    Ok(())
}
