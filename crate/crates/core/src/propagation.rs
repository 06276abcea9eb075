//! Piecewise-constant propagation of the controlled Schrödinger equation.
//!
//! Each cell uses the symmetric split
//! `P_k = D · exp(i μ ε_k dt) · D` with `D = exp(−i H₀ dt / 2)`,
//! so the kick acts at the cell centre. The kick is applied in μ's real
//! orthogonal eigenbasis, which makes a step cost four real N×N products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ControlField, TimeGrid};
use crate::numerics::{matrix_exponential, ComplexMatrix, C64, I};
use crate::systems::ControlSystem;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropagatorTrajectory {
    grid: TimeGrid,
    /// U(t_k) at the n_points + 1 grid nodes.
    u: Vec<ComplexMatrix>,
}

impl PropagatorTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn propagators(&self) -> &[ComplexMatrix] {
        &self.u
    }

    pub fn at(&self, k: usize) -> &ComplexMatrix {
        &self.u[k]
    }

    pub fn u_final(&self) -> &ComplexMatrix {
        self.u.last().expect("trajectory holds at least U(0)")
    }
}

/// μ(t) = −i U_c† μ U_c at each cell centre, where U_c is the half-drifted propagator
/// `exp(−i H₀ dt/2) U(t_k)` seen by the kick of cell k.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DipoleTrajectory {
    grid: TimeGrid,
    mu_t: Vec<ComplexMatrix>,
}

impl DipoleTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.mu_t
    }

    pub fn at(&self, k: usize) -> &ComplexMatrix {
        &self.mu_t[k]
    }

    pub fn len(&self) -> usize {
        self.mu_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu_t.is_empty()
    }
}

/// Precomputed per-(system, grid) data for the split-step kernel.
#[derive(Clone, Debug)]
pub(crate) struct SplitStepper {
    pub n: usize,
    pub dt: f64,
    /// exp(−i E_j dt/2).
    pub half_drift: Vec<C64>,
    /// Q and Qᵀ, row-major.
    pub q: Vec<f64>,
    pub qt: Vec<f64>,
    /// Eigenvalues of μ.
    pub m: Vec<f64>,
}

/// Real and imaginary parts of an N×N matrix.
#[derive(Clone, Debug)]
pub(crate) struct Split {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Split {
    pub fn identity(n: usize) -> Self {
        let mut re = vec![0.0; n * n];
        for i in 0..n {
            re[i * n + i] = 1.0;
        }
        Self {
            re,
            im: vec![0.0; n * n],
        }
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            re: m.as_slice().iter().map(|z| z.re).collect(),
            im: m.as_slice().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let data = self.re.iter().zip(&self.im).map(|(&a, &b)| C64::new(a, b)).collect();
        ComplexMatrix::from_row_major(data).expect("square split matrix")
    }
}

/// c = a · b for row-major real n×n matrices.
#[inline]
pub(crate) fn real_matmul(n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    assert!(a.len() >= n * n && b.len() >= n * n && c.len() >= n * n);
    if n >= 8 {
        let s = n as isize;
        // SAFETY: all three buffers hold n·n elements (checked above) with row stride n.
        unsafe {
            matrixmultiply::dgemm(n, n, n, 1.0, a.as_ptr(), s, 1, b.as_ptr(), s, 1, 0.0, c.as_mut_ptr(), s, 1);
        }
        return;
    }
    c.iter_mut().for_each(|x| *x = 0.0);
    for i in 0..n {
        let c_row = &mut c[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            let b_row = &b[k * n..(k + 1) * n];
            for (cij, &bkj) in c_row.iter_mut().zip(b_row) {
                *cij += aik * bkj;
            }
        }
    }
}

impl SplitStepper {
    pub fn new(system: &ControlSystem, grid: &TimeGrid) -> Self {
        let n = system.dim();
        let dt = grid.dt();
        let half_drift = system
            .drift()
            .levels()
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * dt / 2.0))
            .collect();
        let eig = system.dipole_eigen();
        let q = eig.q.clone();
        let mut qt = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                qt[j * n + i] = q[i * n + j];
            }
        }
        Self {
            n,
            dt,
            half_drift,
            q,
            qt,
            m: eig.values.clone(),
        }
    }

    /// Applies D in place: row j scaled by exp(−i E_j dt/2).
    #[inline]
    pub fn apply_half_drift(&self, u: &mut Split) {
        self.scale_rows(u, false);
    }

    /// Applies D†.
    #[inline]
    pub fn apply_half_drift_adjoint(&self, u: &mut Split) {
        self.scale_rows(u, true);
    }

    #[inline]
    fn scale_rows(&self, u: &mut Split, conj: bool) {
        let n = self.n;
        for (j, d) in self.half_drift.iter().enumerate() {
            let d = if conj { d.conj() } else { *d };
            let re = &mut u.re[j * n..(j + 1) * n];
            let im = &mut u.im[j * n..(j + 1) * n];
            for (r, i) in re.iter_mut().zip(im.iter_mut()) {
                let (a, b) = (*r, *i);
                *r = d.re * a - d.im * b;
                *i = d.re * b + d.im * a;
            }
        }
    }

    /// Advances `u` by one cell with field value `eps`. On return `x` holds
    /// Qᵀ·D·U(t_k), the state seen by the kick; `y` is scratch.
    #[inline]
    pub fn step(&self, u: &mut Split, eps: f64, x: &mut Split, y: &mut Split) {
        let n = self.n;
        self.apply_half_drift(u);
        real_matmul(n, &self.qt, &u.re, &mut x.re);
        real_matmul(n, &self.qt, &u.im, &mut x.im);
        for (a, &ma) in self.m.iter().enumerate() {
            let (s, c) = (ma * eps * self.dt).sin_cos();
            let rows = a * n..(a + 1) * n;
            let (xr, xi) = (&x.re[rows.clone()], &x.im[rows.clone()]);
            let (yr, yi) = (&mut y.re[rows.clone()], &mut y.im[rows]);
            for j in 0..n {
                yr[j] = c * xr[j] - s * xi[j];
                yi[j] = c * xi[j] + s * xr[j];
            }
        }
        real_matmul(n, &self.q, &y.re, &mut u.re);
        real_matmul(n, &self.q, &y.im, &mut u.im);
        self.apply_half_drift(u);
    }
}

fn check_dims(system: &ControlSystem, u0: &ComplexMatrix) -> Result<()> {
    if u0.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: u0.dim(),
        });
    }
    Ok(())
}

pub fn propagate(system: &ControlSystem, field: &ControlField) -> Result<PropagatorTrajectory> {
    propagate_from(system, field, &ComplexMatrix::identity(system.dim()))
}

/// Propagates starting from `u0` instead of the identity.
pub fn propagate_from(
    system: &ControlSystem,
    field: &ControlField,
    u0: &ComplexMatrix,
) -> Result<PropagatorTrajectory> {
    check_dims(system, u0)?;
    let grid = *field.grid();
    let stepper = SplitStepper::new(system, &grid);
    let n = system.dim();
    let mut u = Split::from_matrix(u0);
    let mut x = Split::identity(n);
    let mut y = Split::identity(n);
    let mut out = Vec::with_capacity(grid.n_points() + 1);
    out.push(u0.clone());
    for &eps in field.samples() {
        stepper.step(&mut u, eps, &mut x, &mut y);
        out.push(u.to_matrix());
    }
    Ok(PropagatorTrajectory { grid, u: out })
}

/// Final propagator only, without storing the trajectory.
pub fn propagate_final(system: &ControlSystem, field: &ControlField) -> Result<ComplexMatrix> {
    let stepper = SplitStepper::new(system, field.grid());
    let n = system.dim();
    let mut u = Split::identity(n);
    let mut x = Split::identity(n);
    let mut y = Split::identity(n);
    for &eps in field.samples() {
        stepper.step(&mut u, eps, &mut x, &mut y);
    }
    Ok(u.to_matrix())
}

/// Reference stepper: exact exponential exp(−i(H₀ − μ ε_k) dt) per cell.
pub fn propagate_exact(system: &ControlSystem, field: &ControlField) -> Result<ComplexMatrix> {
    let dt = field.grid().dt();
    let h0 = system.drift().matrix();
    let mu = system.dipole().matrix();
    let mut u = ComplexMatrix::identity(system.dim());
    for &eps in field.samples() {
        let h = h0 - &mu.scale_real(eps);
        u = matrix_exponential(&h, -I * dt)?.matmul(&u);
    }
    Ok(u)
}

pub fn dipole_in_time(system: &ControlSystem, trajectory: &PropagatorTrajectory) -> DipoleTrajectory {
    let grid = trajectory.grid;
    let stepper = SplitStepper::new(system, &grid);
    let mu = system.dipole().matrix();
    let d = ComplexMatrix::from_diagonal(&stepper.half_drift);
    let mu_t = trajectory.u[..grid.n_points()]
        .iter()
        .map(|u| {
            let c = d.matmul(u);
            c.adjoint().matmul(mu).matmul(&c).scale(-I)
        })
        .collect();
    DipoleTrajectory { grid, mu_t }
}
