//! Dynamical Lie algebra closure of iH₀ and iμ over the reals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, I};
use crate::systems::ControlSystem;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Commutators smaller than this fraction of ‖g‖·‖x‖ are treated as exact cancellations.
const CANCELLATION: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieAnalysis {
    pub rank: usize,
    /// Nesting level of the last commutator that enlarged the span; the generators are level 1.
    pub depth: usize,
    pub controllable: bool,
    /// Cumulative span dimension after each nesting level.
    pub basis_dim_by_level: Vec<usize>,
}

/// Orthonormal basis of real vectors (Re, Im interleaved entries).
struct Basis {
    vectors: Vec<Vec<f64>>,
    tol: f64,
}

impl Basis {
    /// Adds the direction of `v` if it is independent; returns whether it was added.
    fn try_add(&mut self, mut v: Vec<f64>) -> bool {
        let norm = l2(&v);
        if norm == 0.0 {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        for _ in 0..2 {
            for b in &self.vectors {
                let c: f64 = b.iter().zip(&v).map(|(p, q)| p * q).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let residual = l2(&v);
        if residual <= self.tol {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= residual);
        self.vectors.push(v);
        true
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn real_coords(a: &ComplexMatrix) -> Vec<f64> {
    a.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn lie_closure(h0: &ComplexMatrix, mu: &ComplexMatrix, tol: f64) -> Result<LieAnalysis> {
    for m in [h0, mu] {
        let tolerance = 1e-10 * m.frobenius_norm();
        let violation = m.hermitian_violation();
        if violation > tolerance {
            return Err(Error::NotHermitian {
                violation,
                tolerance,
            });
        }
    }
    if h0.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            found: mu.dim(),
        });
    }
    let n = h0.dim();
    let full = n * n;
    let generators = [h0.scale(I), mu.scale(I)];
    let mut basis = Basis {
        vectors: Vec::new(),
        tol,
    };

    let mut frontier = Vec::new();
    for g in &generators {
        if basis.try_add(real_coords(g)) {
            frontier.push(g.clone());
        }
    }
    let mut dims = vec![basis.vectors.len()];
    let mut depth = if frontier.is_empty() { 0 } else { 1 };

    while !frontier.is_empty() && basis.vectors.len() < full {
        let mut next = Vec::new();
        'level: for x in &frontier {
            for g in &generators {
                let c = ComplexMatrix::commutator(g, x);
                let scale = g.frobenius_norm() * x.frobenius_norm();
                if c.frobenius_norm() <= CANCELLATION * scale {
                    continue;
                }
                if basis.try_add(real_coords(&c)) {
                    next.push(c);
                    if basis.vectors.len() == full {
                        break 'level;
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        depth += 1;
        dims.push(basis.vectors.len());
        frontier = next;
    }

    let rank = basis.vectors.len();
    Ok(LieAnalysis {
        rank,
        depth,
        controllable: rank == full,
        basis_dim_by_level: dims,
    })
}

pub fn is_controllable(system: &ControlSystem) -> bool {
    lie_closure(system.drift().matrix(), system.dipole().matrix(), DEFAULT_TOL)
        .map(|a| a.controllable)
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::haar_random_unitary;
    use crate::systems::*;

    fn rotor(n: usize) -> ComplexMatrix {
        build_rotor_drift(n).matrix().clone()
    }

    #[test]
    fn commuting_generators_are_not_controllable() {
        let h0 = rotor(3);
        let mu = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 5.0]);
        let a = lie_closure(&h0, &mu, DEFAULT_TOL).unwrap();
        assert_eq!(a.rank, 2);
        assert!(!a.controllable);
        let a = lie_closure(&h0, &ComplexMatrix::identity(3), DEFAULT_TOL).unwrap();
        assert_eq!(a.rank, 2);
        let a = lie_closure(&h0, &ComplexMatrix::zeros(3), DEFAULT_TOL).unwrap();
        assert_eq!(a.rank, 1);
    }

    #[test]
    fn two_level_flat_is_controllable() {
        let mu = build_dipole_flat(2, 1.0, 0).matrix().clone();
        let a = lie_closure(&rotor(2), &mu, DEFAULT_TOL).unwrap();
        assert_eq!(a.rank, 4);
        assert!(a.controllable);
    }

    /// Brute-force span of all nested commutator words up to length 4.
    #[test]
    fn closure_matches_brute_force_span() {
        let h0 = rotor(2).scale(I);
        let mu = build_dipole_flat(2, 1.0, 0).matrix().scale(I);
        let mut words = vec![h0.clone(), mu.clone()];
        let mut layer = words.clone();
        for _ in 0..3 {
            let mut next = Vec::new();
            for x in &layer {
                for g in [&h0, &mu] {
                    next.push(ComplexMatrix::commutator(g, x));
                }
            }
            words.extend(next.iter().cloned());
            layer = next;
        }
        let rows: Vec<f64> = words.iter().flat_map(real_coords).collect();
        let m = nalgebra::DMatrix::from_row_slice(words.len(), 8, &rows);
        let sv = m.singular_values();
        let smax = sv.max();
        let rank = sv.iter().filter(|&&s| s > 1e-10 * smax).count();
        assert_eq!(rank, 4);
    }

    #[test]
    fn rank_is_conjugation_invariant() {
        let h0 = rotor(4);
        let mu = build_dipole_banded(4, 1, 1.0, Signs::Random(2)).unwrap().matrix().clone();
        let base = lie_closure(&h0, &mu, DEFAULT_TOL).unwrap().rank;
        for seed in 0..10 {
            let v = haar_random_unitary(4, seed);
            let conj = |m: &ComplexMatrix| v.matmul(m).matmul(&v.adjoint());
            let r = lie_closure(&conj(&h0), &conj(&mu), DEFAULT_TOL).unwrap().rank;
            assert_eq!(r, base);
        }
    }

    #[test]
    fn flat_depth_not_above_single_band_depth() {
        let h0 = rotor(8);
        let flat = build_dipole_flat(8, 1.0, 1).matrix().clone();
        let band = build_dipole_banded(8, 1, 1.0, Signs::Random(1)).unwrap().matrix().clone();
        let a = lie_closure(&h0, &flat, DEFAULT_TOL).unwrap();
        let b = lie_closure(&h0, &band, DEFAULT_TOL).unwrap();
        assert!(a.controllable && b.controllable);
        assert!(a.depth <= b.depth, "flat {} banded {}", a.depth, b.depth);
        assert!(a.basis_dim_by_level.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut mu = ComplexMatrix::identity(2);
        mu[(0, 1)] = crate::numerics::ONE;
        assert!(lie_closure(&rotor(2), &mu, DEFAULT_TOL).is_err());
    }
}
