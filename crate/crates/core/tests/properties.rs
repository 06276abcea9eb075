//! Randomized invariants over systems, fields and targets.

use proptest::prelude::*;
use unitary_landscape::fields::{initial_field, read_field, write_field, ControlField, FieldParams, TimeGrid};
use unitary_landscape::landscape::{slope_bound, slope_metric};
use unitary_landscape::numerics::{ComplexMatrix, C64};
use unitary_landscape::objective::{evaluate, objective_j};
use unitary_landscape::propagation::propagate_final;
use unitary_landscape::systems::{
    build_dipole_banded, build_dipole_d, build_dipole_flat, build_rotor_drift, format_matrix, parse_matrix,
    ControlSystem, Signs, TargetGate, DEFAULT_ALPHA,
};

fn system(n: usize, family: u8, seed: u64) -> ControlSystem {
    let mu = match family {
        0 => build_dipole_d(n, 1.0, DEFAULT_ALPHA, seed).unwrap(),
        1 => build_dipole_d(n, 0.6, DEFAULT_ALPHA, seed).unwrap(),
        2 => build_dipole_banded(n, 1, DEFAULT_ALPHA, Signs::Random(seed)).unwrap(),
        _ => build_dipole_flat(n, DEFAULT_ALPHA, seed),
    };
    ControlSystem::new(build_rotor_drift(n), mu).unwrap()
}

fn field(sys: &ControlSystem, seed: u64, amplitude: f64) -> ControlField {
    let grid = TimeGrid::new(14.0, 128).unwrap();
    let params = FieldParams {
        amplitude,
        ..FieldParams::default()
    };
    initial_field(&grid, &params, seed, sys).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn slope_never_exceeds_its_bound(n in 2usize..=5, family in 0u8..4, seed in 0u64..1000, amp in 0.5f64..20.0) {
        let sys = system(n, family, seed);
        let f = field(&sys, seed, amp);
        let (_, g) = evaluate(&sys, &TargetGate::haar(n, seed + 1), &f).unwrap();
        let bound = slope_bound(n, f.grid().t_final(), sys.dipole().matrix());
        prop_assert!(slope_metric(&g) <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn propagator_is_unitary_and_j_in_range(n in 2usize..=5, family in 0u8..4, seed in 0u64..1000, amp in 0.5f64..20.0) {
        let sys = system(n, family, seed);
        let u = propagate_final(&sys, &field(&sys, seed, amp)).unwrap();
        prop_assert!(u.is_unitary(1e-10));
        let w = TargetGate::haar(n, seed);
        let j = objective_j(&u, &w).j;
        prop_assert!((0.0..=4.0 * n as f64).contains(&j));
        let v_trace = w.matrix().adjoint().matmul(&u).trace().re;
        prop_assert!((j - (2.0 * n as f64 - 2.0 * v_trace)).abs() < 1e-10);
    }

    #[test]
    fn matrix_text_round_trips(n in 1usize..=4, entries in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 16)) {
        let data: Vec<C64> = entries[..n * n].iter().map(|&(re, im)| C64::new(re, im)).collect();
        let m = ComplexMatrix::from_row_major(data).unwrap();
        prop_assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn field_csv_round_trips(seed in 0u64..1000, amp in 0.1f64..30.0) {
        let sys = system(3, 0, seed);
        let f = field(&sys, seed, amp);
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        let back = read_field(buf.as_slice()).unwrap();
        prop_assert_eq!(back.samples(), f.samples());
        prop_assert!((back.grid().t_final() - f.grid().t_final()).abs() < 1e-9);
    }
}
