use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, C64};
use super::rng::{stream, Purpose};

/// Haar-distributed unitary of size `n` from a seed (Mezzadri's construction).
pub fn haar_random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = stream(0, seed, Purpose::Haar);
    haar_from_rng(n, &mut rng)
}

pub fn haar_from_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = ComplexMatrix::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = z.to_nalgebra().qr();
    let q = qr.q();
    let r = qr.r();
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            let m = d.norm();
            if m > 0.0 {
                d / m
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    ComplexMatrix::from_fn(n, |i, j| q[(i, j)] * phases[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_with_unit_determinant_modulus() {
        for n in 1..=8 {
            let u = haar_random_unitary(n, 17 + n as u64);
            assert!(u.is_unitary(1e-12), "n={n}: {}", u.unitarity_defect());
            let det = u.to_nalgebra().determinant();
            assert!((det.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bit_reproducible() {
        assert_eq!(haar_random_unitary(5, 9), haar_random_unitary(5, 9));
    }

    #[test]
    fn trace_second_moment_is_one() {
        let draws = 2000;
        let mean: f64 = (0..draws)
            .map(|s| haar_random_unitary(4, s).trace().norm_sqr())
            .sum::<f64>()
            / draws as f64;
        assert!((0.9..=1.1).contains(&mean), "E|Tr U|^2 = {mean}");
    }
}
