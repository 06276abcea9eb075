//! Lie algebra rank and commutator depth for each dipole family.

use unitary_landscape::lie::{lie_closure, DEFAULT_TOL};
use unitary_landscape::numerics::ComplexMatrix;
use unitary_landscape::systems::{
    build_dipole_banded, build_dipole_d, build_dipole_flat, build_dipole_sparse, build_dipole_tensor,
    build_rotor_drift, ControlHamiltonian, Signs, DEFAULT_ALPHA,
};

fn main() -> unitary_landscape::Result<()> {
    let seed = 0;
    println!("{:>3} {:<12} {:>5} {:>6}  {}", "N", "dipole", "rank", "depth", "span by level");
    for n in [4usize, 8] {
        let h0 = build_rotor_drift(n);
        let mut families: Vec<(&str, ControlHamiltonian)> = vec![
            ("D=1.0", build_dipole_d(n, 1.0, DEFAULT_ALPHA, seed)?),
            ("D=0.6", build_dipole_d(n, 0.6, DEFAULT_ALPHA, seed)?),
            ("banded(1)", build_dipole_banded(n, 1, DEFAULT_ALPHA, Signs::Random(seed))?),
            ("sparse(0.5)", build_dipole_sparse(n, 0.5, DEFAULT_ALPHA, seed)?),
            ("flat", build_dipole_flat(n, DEFAULT_ALPHA, seed)),
        ];
        families.push(("tensor", build_dipole_tensor(n.trailing_zeros(), DEFAULT_ALPHA)?));
        for (name, mu) in &families {
            let lie = lie_closure(h0.matrix(), mu.matrix(), DEFAULT_TOL)?;
            println!("{n:>3} {name:<12} {:>5} {:>6}  {:?}", lie.rank, lie.depth, lie.basis_dim_by_level);
        }
    }

    // A dipole that only couples |0> and |1> leaves the rest of the ladder unreachable.
    let n = 4;
    let mut local = vec![unitary_landscape::numerics::C64::new(0.0, 0.0); n * n];
    local[1] = 1.0.into();
    local[n] = 1.0.into();
    let lie = lie_closure(build_rotor_drift(n).matrix(), &ComplexMatrix::from_row_major(local)?, DEFAULT_TOL)?;
    println!("two-level coupling at N = {n}: rank {} of {}, controllable {}", lie.rank, n * n, lie.controllable);
    Ok(())
}
