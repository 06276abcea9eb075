//! The cost J = ‖W − U(T)‖²_F, its field gradient and Hessian kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ControlField, TimeGrid};
use crate::numerics::{symmetric_eigenvalues, ComplexMatrix, I};
use crate::propagation::{real_matmul, DipoleTrajectory, PropagatorTrajectory, Split, SplitStepper};
use crate::systems::{ControlSystem, TargetGate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    #[serde(rename = "J")]
    pub j: f64,
    pub fidelity: f64,
}

pub fn objective_j(u_final: &ComplexMatrix, target: &TargetGate) -> ObjectiveValue {
    let w = target.matrix();
    assert_eq!(u_final.dim(), w.dim(), "objective dimension mismatch");
    let n = w.dim() as f64;
    let j = (w - u_final).frobenius_norm().powi(2);
    let fidelity = w.hs_inner(u_final).re / n;
    ObjectiveValue { j, fidelity }
}

/// δJ/δε at each cell; multiply by dt for the derivative with respect to a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientField {
    pub grid: TimeGrid,
    pub samples: Vec<f64>,
}

impl GradientField {
    /// ∫ g² dt.
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|g| g * g).sum::<f64>() * self.grid.dt()
    }
}

/// Largest tolerated imaginary part of a gradient sample.
const IMAGINARY_RESIDUE_TOL: f64 = 1e-9;

/// g(t_k) = −i Tr[(V − V†) μ̃_k] with V = W†U(T) and μ̃_k = i μ(t_k).
pub fn gradient(
    trajectory: &PropagatorTrajectory,
    dipole: &DipoleTrajectory,
    target: &TargetGate,
) -> Result<GradientField> {
    let v = target.matrix().adjoint().matmul(trajectory.u_final());
    let skew = &v - &v.adjoint();
    let mut samples = Vec::with_capacity(dipole.len());
    for mu_t in dipole.matrices() {
        let g = -I * skew.trace_of_product(&mu_t.scale(I));
        let scale = 1.0 + g.re.abs();
        if g.im.abs() > IMAGINARY_RESIDUE_TOL * scale {
            return Err(Error::ImaginaryResidue(g.im));
        }
        samples.push(g.re);
    }
    Ok(GradientField {
        grid: *trajectory.grid(),
        samples,
    })
}

/// ∇F = U W† U − W, the gradient of F(U) = ‖W − U‖² on the unitary group.
pub fn kinematic_gradient(u_final: &ComplexMatrix, target: &TargetGate) -> ComplexMatrix {
    let w = target.matrix();
    &u_final.matmul(&w.adjoint()).matmul(u_final) - w
}

/// Time-discretized second variation: `matrix[k·n + l] = H(t_k, t_l)·dt`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HessianKernel {
    pub grid: TimeGrid,
    pub matrix: Vec<f64>,
}

impl HessianKernel {
    pub fn dim(&self) -> usize {
        self.grid.n_points()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.matrix[k * self.dim() + l]
    }

    /// Σ_k M_kk, the quadrature of ∫ H(t, t) dt.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|k| self.get(k, k)).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigenvalues(self.dim(), &self.matrix)
    }

    /// Number of eigenvalues above `rel`·max|λ| in magnitude.
    pub fn numerical_rank(&self, rel: f64) -> usize {
        let ev = self.eigenvalues();
        let max = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        ev.iter().filter(|x| x.abs() > rel * max).count()
    }
}

/// H(t, t') = 2 Re Tr[V μ̃(t) μ̃(t')] for t ≥ t', mirrored to t < t'.
pub fn hessian_kernel(
    trajectory: &PropagatorTrajectory,
    dipole: &DipoleTrajectory,
    target: &TargetGate,
) -> Result<HessianKernel> {
    let grid = *trajectory.grid();
    let n = grid.n_points();
    let dt = grid.dt();
    let v = target.matrix().adjoint().matmul(trajectory.u_final());
    let hermitian: Vec<ComplexMatrix> = dipole.matrices().iter().map(|m| m.scale(I)).collect();
    let weighted: Vec<ComplexMatrix> = hermitian.iter().map(|m| v.matmul(m)).collect();
    let mut matrix = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..=k {
            let h = 2.0 * weighted[k].trace_of_product(&hermitian[l]).re * dt;
            matrix[k * n + l] = h;
            matrix[l * n + k] = h;
        }
    }
    let asymmetry = (0..n)
        .flat_map(|k| (0..k).map(move |l| (k, l)))
        .map(|(k, l)| (matrix[k * n + l] - matrix[l * n + k]).abs())
        .fold(0.0, f64::max);
    if asymmetry > 1e-9 {
        return Err(Error::AsymmetricKernel(asymmetry));
    }
    Ok(HessianKernel { grid, matrix })
}

/// Reusable workspace for repeated evaluation of J and its gradient.
#[derive(Clone, Debug)]
pub struct Evaluator {
    stepper: SplitStepper,
    target: TargetGate,
    grid: TimeGrid,
    kicked_re: Vec<f64>,
    kicked_im: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub u_final: ComplexMatrix,
    pub value: ObjectiveValue,
}

impl Evaluator {
    pub fn new(system: &ControlSystem, target: &TargetGate, grid: &TimeGrid) -> Result<Self> {
        if system.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                found: target.dim(),
            });
        }
        Ok(Self {
            stepper: SplitStepper::new(system, grid),
            target: target.clone(),
            grid: *grid,
            kicked_re: Vec::new(),
            kicked_im: Vec::new(),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn target(&self) -> &TargetGate {
        &self.target
    }

    fn check_len(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.grid.n_points() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.n_points(),
                found: samples.len(),
            });
        }
        Ok(())
    }

    fn forward(&mut self, samples: &[f64], record: bool) -> ComplexMatrix {
        let n = self.stepper.n;
        let nn = n * n;
        let mut u = Split::identity(n);
        let mut x = Split::identity(n);
        let mut y = Split::identity(n);
        if record {
            self.kicked_re.resize(samples.len() * nn, 0.0);
            self.kicked_im.resize(samples.len() * nn, 0.0);
        }
        for (k, &eps) in samples.iter().enumerate() {
            self.stepper.step(&mut u, eps, &mut x, &mut y);
            if record {
                self.kicked_re[k * nn..(k + 1) * nn].copy_from_slice(&x.re);
                self.kicked_im[k * nn..(k + 1) * nn].copy_from_slice(&x.im);
            }
        }
        u.to_matrix()
    }

    pub fn value(&mut self, samples: &[f64]) -> Result<Evaluation> {
        self.check_len(samples)?;
        let u_final = self.forward(samples, false);
        let value = objective_j(&u_final, &self.target);
        Ok(Evaluation { u_final, value })
    }

    /// Writes δJ/δε(t_k) into `grad`.
    pub fn value_and_gradient(&mut self, samples: &[f64], grad: &mut [f64]) -> Result<Evaluation> {
        self.check_len(samples)?;
        if grad.len() != samples.len() {
            return Err(Error::DimensionMismatch {
                expected: samples.len(),
                found: grad.len(),
            });
        }
        let u_final = self.forward(samples, true);
        let value = objective_j(&u_final, &self.target);
        let n = self.stepper.n;
        let nn = n * n;
        let v = Split::from_matrix(&self.target.matrix().adjoint().matmul(&u_final));
        let mut p = vec![0.0; nn];
        let mut q = vec![0.0; nn];
        let mut yr = vec![0.0; nn];
        let mut yi = vec![0.0; nn];
        for (k, g) in grad.iter_mut().enumerate() {
            let xr = &self.kicked_re[k * nn..(k + 1) * nn];
            let xi = &self.kicked_im[k * nn..(k + 1) * nn];
            // Y = X·V
            real_matmul(n, xr, &v.re, &mut p);
            real_matmul(n, xi, &v.im, &mut q);
            for ((y, a), b) in yr.iter_mut().zip(&p).zip(&q) {
                *y = a - b;
            }
            real_matmul(n, xr, &v.im, &mut p);
            real_matmul(n, xi, &v.re, &mut q);
            for ((y, a), b) in yi.iter_mut().zip(&p).zip(&q) {
                *y = a + b;
            }
            let mut acc = 0.0;
            for (a, &ma) in self.stepper.m.iter().enumerate() {
                let row = a * n..(a + 1) * n;
                let s: f64 = yi[row.clone()]
                    .iter()
                    .zip(&xr[row.clone()])
                    .zip(yr[row.clone()].iter().zip(&xi[row]))
                    .map(|((yi, xr), (yr, xi))| yi * xr - yr * xi)
                    .sum();
                acc += ma * s;
            }
            *g = 2.0 * acc;
        }
        Ok(Evaluation { u_final, value })
    }
}

/// J and δJ/δε for one field.
pub fn evaluate(
    system: &ControlSystem,
    target: &TargetGate,
    field: &ControlField,
) -> Result<(Evaluation, GradientField)> {
    let mut ev = Evaluator::new(system, target, field.grid())?;
    let mut g = vec![0.0; field.grid().n_points()];
    let e = ev.value_and_gradient(field.samples(), &mut g)?;
    Ok((
        e,
        GradientField {
            grid: *field.grid(),
            samples: g,
        },
    ))
}
