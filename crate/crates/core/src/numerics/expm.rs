//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005).

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Returns exp(scale · a).
pub fn matrix_exponential(a: &ComplexMatrix, scale: C64) -> Result<ComplexMatrix> {
    if !a.is_finite() || !scale.re.is_finite() || !scale.im.is_finite() {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    let a = a.scale(scale);
    let n = a.dim();
    let norm = a.one_norm();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    if norm <= THETA_9 {
        let a2 = a.matmul(&a);
        let r = if norm <= THETA_3 {
            pade_low(&a, &[a2], &B3)
        } else if norm <= THETA_5 {
            let a4 = a2.matmul(&a2);
            pade_low(&a, &[a2, a4], &B5)
        } else if norm <= THETA_7 {
            let a4 = a2.matmul(&a2);
            let a6 = a4.matmul(&a2);
            pade_low(&a, &[a2, a4, a6], &B7)
        } else {
            let a4 = a2.matmul(&a2);
            let a6 = a4.matmul(&a2);
            let a8 = a6.matmul(&a2);
            pade_low(&a, &[a2, a4, a6, a8], &B9)
        };
        return r;
    }

    let s = ((norm / THETA_13).log2().ceil()).max(0.0) as i32;
    let a = a.scale_real(0.5f64.powi(s));
    let mut r = pade_13(&a)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    if !r.is_finite() {
        return Err(Error::NonFinite("matrix exponential result"));
    }
    Ok(r)
}

/// Padé approximant of degree m = 2·powers.len() + 1 given A², A⁴, ...
fn pade_low(a: &ComplexMatrix, powers: &[ComplexMatrix], b: &[f64]) -> Result<ComplexMatrix> {
    let n = a.dim();
    let mut u = ComplexMatrix::identity(n).scale_real(b[1]);
    let mut v = ComplexMatrix::identity(n).scale_real(b[0]);
    for (k, p) in powers.iter().enumerate() {
        u += &p.scale_real(b[2 * k + 3]);
        v += &p.scale_real(b[2 * k + 2]);
    }
    let u = a.matmul(&u);
    finish(&u, &v)
}

fn pade_13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim();
    let b = &B13;
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut inner_u = a6.scale_real(b[13]);
    inner_u += &a4.scale_real(b[11]);
    inner_u += &a2.scale_real(b[9]);
    let mut u = a6.matmul(&inner_u);
    u += &a6.scale_real(b[7]);
    u += &a4.scale_real(b[5]);
    u += &a2.scale_real(b[3]);
    u += &id.scale_real(b[1]);
    let u = a.matmul(&u);

    let mut inner_v = a6.scale_real(b[12]);
    inner_v += &a4.scale_real(b[10]);
    inner_v += &a2.scale_real(b[8]);
    let mut v = a6.matmul(&inner_v);
    v += &a6.scale_real(b[6]);
    v += &a4.scale_real(b[4]);
    v += &a2.scale_real(b[2]);
    v += &id.scale_real(b[0]);
    finish(&u, &v)
}

/// Solves (V − U) R = (V + U).
fn finish(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    q.solve(&p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::{I, ONE, ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn power_series(a: &ComplexMatrix, scale: C64, terms: usize) -> ComplexMatrix {
        let n = a.dim();
        let x = a.scale(scale);
        let mut term = ComplexMatrix::identity(n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = term.matmul(&x).scale_real(1.0 / k as f64);
            sum += &term;
        }
        sum
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let m = ComplexMatrix::from_fn(n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&m + &m.adjoint()).scale_real(0.5)
    }

    #[test]
    fn zero_scale_gives_identity() {
        let a = ComplexMatrix::from_fn(3, |i, j| C64::new((i + j) as f64, 1.0));
        let e = matrix_exponential(&a, ZERO).unwrap();
        assert_eq!(e, ComplexMatrix::identity(3));
    }

    #[test]
    fn pauli_x_quarter_turn() {
        let x = ComplexMatrix::from_fn(2, |i, j| if i != j { ONE } else { ZERO });
        let scale = -I * std::f64::consts::FRAC_PI_2;
        let e = matrix_exponential(&x, scale).unwrap();
        let oracle = power_series(&x, scale, 30);
        assert!((&e - &oracle).frobenius_norm() < 1e-12);
        assert!((&e - &x.scale(-I)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn matches_power_series_across_pade_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &target in &[1e-3, 0.1, 0.8, 1.9, 4.0, 12.0] {
            let h = random_hermitian(4, &mut rng);
            let t = target / h.one_norm();
            let e = matrix_exponential(&h, -I * t).unwrap();
            let oracle = power_series(&h, -I * t, 80);
            let err = (&e - &oracle).frobenius_norm() / oracle.frobenius_norm();
            assert!(err < 1e-12, "norm {target}: rel err {err}");
        }
    }

    #[test]
    fn hermitian_generator_gives_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..100 {
            let n = 1 + case % 8;
            let h = random_hermitian(n, &mut rng);
            let t = rng.random_range(0.0..50.0);
            let u = matrix_exponential(&h, -I * t).unwrap();
            assert!(u.is_unitary(1e-12), "case {case}: {}", u.unitarity_defect());
        }
    }

    #[test]
    fn large_norm_diagonal_is_accurate() {
        let diag = [0.0, 1.0, 3.0, 6.0];
        let h = ComplexMatrix::from_real_diagonal(&diag);
        let t = 150.0;
        let e = matrix_exponential(&h, -I * t).unwrap();
        for (k, &d) in diag.iter().enumerate() {
            let exact = (-I * d * t).exp();
            assert!((e[(k, k)] - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = ComplexMatrix::identity(2);
        a[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matrix_exponential(&a, ONE).is_err());
    }
}
