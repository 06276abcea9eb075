//! Gradient flow and the monotone type-2 iteration on the same problem.

use unitary_landscape::fields::{default_grid, initial_field, FieldParams};
use unitary_landscape::optimizers::{default_beta, gradient_flow, pmp_iterate, FlowConfig, PMPConfig};
use unitary_landscape::systems::{build_dipole_d, build_rotor_drift, ControlSystem, TargetGate, DEFAULT_ALPHA};

fn main() -> unitary_landscape::Result<()> {
    let (n, seed) = (4, 2);
    let system = ControlSystem::new(build_rotor_drift(n), build_dipole_d(n, 1.0, DEFAULT_ALPHA, seed)?)?;
    let target = TargetGate::haar(n, seed);
    let grid = default_grid(&system, None)?;
    let field = initial_field(&grid, &FieldParams::default(), seed, &system)?;

    let flow = gradient_flow(&system, &target, &field, &FlowConfig::default())?;
    let pmp = pmp_iterate(&system, &target, &field, &PMPConfig::default())?;
    let worst_rise = pmp.j_trace.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);

    println!("default beta {:.3e}", default_beta(&system, grid.t_final()));
    println!("{:<6} {:>8} {:>12} {:>10}", "method", "effort", "final J", "status");
    for (name, run) in [("flow", &flow), ("pmp", &pmp)] {
        println!("{name:<6} {:>8} {:>12.3e} {:>10?}", run.effort, run.final_j(), run.status);
    }
    println!("largest single-iteration change of J under pmp: {worst_rise:.2e}");
    println!("distance between final fields: {:.3}", flow.final_field().distance(&pmp.final_field()));
    Ok(())
}
