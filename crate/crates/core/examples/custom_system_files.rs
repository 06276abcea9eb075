//! Load a drift, dipole and target from matrix text files and optimize.
//! The same files work with `ucl optimize --drift file --drift-file ...`.

use unitary_landscape::fields::{default_grid, initial_field, FieldParams};
use unitary_landscape::lie::is_controllable;
use unitary_landscape::optimizers::{gradient_flow, FlowConfig};
use unitary_landscape::systems::{custom_dipole, custom_drift, read_matrix_file, ControlSystem, TargetGate};

const DRIFT: &str = "# three unevenly spaced levels
3
0 0 0
0 1.3 0
0 0 3.1
";

// With a traceless dipole det U(T) would be fixed by the drift alone, and a
// target of the wrong global phase would be out of reach.
const DIPOLE: &str = "3
1 1 0.4
1 1 0.8
0.4 0.8 1
";

// Cyclic shift |0> -> |1> -> |2> -> |0> with a phase on one leg.
const TARGET: &str = "3
0 0 1
0+1j 0 0
0 1 0
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("custom_system_files");
    std::fs::create_dir_all(&dir)?;
    for (name, text) in [("drift.txt", DRIFT), ("dipole.txt", DIPOLE), ("target.txt", TARGET)] {
        std::fs::write(dir.join(name), text)?;
    }

    let system = ControlSystem::new(
        custom_drift(read_matrix_file(dir.join("drift.txt"))?)?,
        custom_dipole(read_matrix_file(dir.join("dipole.txt"))?)?,
    )?;
    let target = TargetGate::custom(read_matrix_file(dir.join("target.txt"))?)?;
    println!("controllable: {}", is_controllable(&system));

    let grid = default_grid(&system, None)?;
    let field = initial_field(&grid, &FieldParams::default(), 0, &system)?;
    let run = gradient_flow(&system, &target, &field, &FlowConfig::default())?;
    println!("{} points, effort {}, final J {:.2e} ({:?})", grid.n_points(), run.effort, run.final_j(), run.status);
    println!("files in {}", dir.display());
    Ok(())
}
