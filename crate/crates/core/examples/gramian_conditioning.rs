//! Gramian conditioning along a run, and its rank against the Lie rank.

use unitary_landscape::fields::{default_grid, initial_field, FieldParams};
use unitary_landscape::landscape::{gramian, gramian_flow_check};
use unitary_landscape::lie::{lie_closure, DEFAULT_TOL};
use unitary_landscape::optimizers::{gradient_flow, FlowConfig, RecordFlags};
use unitary_landscape::propagation::{dipole_in_time, propagate};
use unitary_landscape::systems::{build_dipole_banded, build_rotor_drift, ControlSystem, Signs, TargetGate, DEFAULT_ALPHA};

fn main() -> unitary_landscape::Result<()> {
    let (n, seed) = (4, 3);
    let system = ControlSystem::new(build_rotor_drift(n), build_dipole_banded(n, 1, DEFAULT_ALPHA, Signs::Random(seed))?)?;
    let target = TargetGate::haar(n, seed);
    let grid = default_grid(&system, None)?;
    let field = initial_field(&grid, &FieldParams::default(), seed, &system)?;
    let config = FlowConfig {
        record: RecordFlags {
            gramian: true,
            ..RecordFlags::default()
        },
        ..FlowConfig::default()
    };
    let run = gradient_flow(&system, &target, &field, &config)?;

    let every = (run.metric_traces.len() / 12).max(1);
    println!("{:>6} {:>10} {:>12}", "step", "J", "cond G");
    for m in run.metric_traces.iter().step_by(every) {
        println!("{:>6} {:>10.3e} {:>12.3e}", m.step, m.j, m.gramian_condition.unwrap_or(f64::NAN));
    }

    let traj = propagate(&system, &run.final_field())?;
    let g = gramian(&dipole_in_time(&system, &traj), traj.u_final())?;
    let lie = lie_closure(system.drift().matrix(), system.dipole().matrix(), DEFAULT_TOL)?;
    println!("final Gramian rank {} of {}; Lie rank {}", g.rank, n * n, lie.rank);

    let check = gramian_flow_check(&system, &target, &run.initial_field(), 1e-6)?;
    println!("flow check at the initial field: {check:?}");
    Ok(())
}
