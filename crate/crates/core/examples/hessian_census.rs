//! Hessian signatures at a polished optimum and at a refined m = 1 saddle.

use unitary_landscape::fields::{default_grid, initial_field, ControlField, FieldParams};
use unitary_landscape::landscape::{
    critical_census, hessian_signature, hessian_trace, refine_critical_point, DEFAULT_ZERO_FACTOR,
};
use unitary_landscape::numerics::ComplexMatrix;
use unitary_landscape::objective::hessian_kernel;
use unitary_landscape::optimizers::{gradient_flow, FlowConfig};
use unitary_landscape::propagation::{dipole_in_time, propagate, propagate_final};
use unitary_landscape::systems::{build_dipole_d, build_rotor_drift, ControlSystem, TargetGate, DEFAULT_ALPHA};

fn census(system: &ControlSystem, target: &TargetGate, field: &ControlField) -> unitary_landscape::Result<()> {
    let traj = propagate(system, field)?;
    let k = hessian_kernel(&traj, &dipole_in_time(system, &traj), target)?;
    let sig = hessian_signature(&k, DEFAULT_ZERO_FACTOR);
    let n = system.dim();
    println!(
        "  (+, -, 0) = ({}, {}, {}); restricted to the {} spanned directions {:?}; trace {:.4}",
        sig.n_positive,
        sig.n_negative,
        sig.n_zero,
        n * n,
        sig.non_null(n),
        hessian_trace(&k)
    );
    Ok(())
}

fn main() -> unitary_landscape::Result<()> {
    let (n, seed) = (4, 0);
    let system = ControlSystem::new(build_rotor_drift(n), build_dipole_d(n, 1.0, DEFAULT_ALPHA, seed)?)?;
    let target = TargetGate::haar(n, seed);
    let grid = default_grid(&system, None)?;
    let field = initial_field(&grid, &FieldParams::default(), seed, &system)?;

    // A loose optimum still carries O(√J) contamination; polish before counting.
    let config = FlowConfig {
        convergence_threshold: 1e-12,
        ..FlowConfig::default()
    };
    let run = gradient_flow(&system, &target, &field, &config)?;
    let optimum = run.final_field();
    println!("optimum, J = {:.2e}, expected {:?}", run.final_j(), critical_census(n, 0));
    census(&system, &target, &optimum)?;
    let mu = system.dipole().matrix();
    println!("  2T Tr mu^2 = {:.4}", 2.0 * grid.t_final() * mu.matmul(mu).trace().re);

    // Flipping one eigenphase of the target turns the same field into an m = 1 critical point.
    let u = propagate_final(&system, &optimum)?;
    let mut flip = vec![1.0; n];
    flip[0] = -1.0;
    let saddle_target = TargetGate::custom(u.matmul(&ComplexMatrix::from_real_diagonal(&flip)))?;
    let nudged = ControlField::from_fn(grid, |t| 0.02 * (0.7 * t).sin())?;
    let start = ControlField::new(
        grid,
        optimum.samples().iter().zip(nudged.samples()).map(|(a, b)| a + b).collect(),
    )?;
    let refined = refine_critical_point(&system, &saddle_target, &start, 1e-10, 40)?;
    println!(
        "saddle, J = {:.9} after {} refinement steps, expected {:?}",
        refined.j,
        refined.iterations,
        critical_census(n, 1)
    );
    census(&system, &saddle_target, &refined.field)?;
    Ok(())
}
