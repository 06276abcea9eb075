//! Drive a 4-level rotor to a Haar-random gate with the gradient flow.
//!
//! cargo run --release --example optimize_gate -- [seed]

use unitary_landscape::fields::{default_grid, initial_field, write_field_csv, FieldParams};
use unitary_landscape::optimizers::{gradient_flow, FlowConfig};
use unitary_landscape::systems::{build_dipole_d, build_rotor_drift, ControlSystem, TargetGate, DEFAULT_ALPHA};

fn main() -> unitary_landscape::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let n = 4;
    let system = ControlSystem::new(build_rotor_drift(n), build_dipole_d(n, 1.0, DEFAULT_ALPHA, seed)?)?;
    let target = TargetGate::haar(n, seed);
    let grid = default_grid(&system, None)?;
    let field = initial_field(&grid, &FieldParams::default(), seed, &system)?;

    let run = gradient_flow(&system, &target, &field, &FlowConfig::default())?;
    println!("status {:?} after {} steps ({} rejected)", run.status, run.effort, run.rejected);
    println!("J: {:.4} -> {:.3e}", run.j_trace[0], run.final_j());
    for cp in &run.checkpoints {
        println!("  {:>8}  step {:>4}  J {:.3e}", cp.label, cp.step, cp.j);
    }

    let out = std::env::temp_dir().join(format!("optimize_gate_{seed}.csv"));
    write_field_csv(&out, &run.final_field())?;
    println!("final field written to {}", out.display());
    Ok(())
}
