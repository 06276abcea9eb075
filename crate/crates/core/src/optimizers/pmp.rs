//! Two-stage PMP-iterative updates.
//!
//! Iteration k back-propagates the costate φ(T) = ∇F(U_{k−1}(T)) under the
//! intermediate field ε̃ = α ε_{k−1} + β G[φ, U_{k−1}], then propagates forward
//! under ε_k = α ε̃ + β G[φ, U_k]. Here G[φ, U](t) = Re Tr(φ† iμ U), which is
//! δJ/δε when φ and U come from the same field.

use super::{convergence_check, AlgorithmConfig, OptimizationRun, PMPConfig, Recorder, Status};
use crate::error::Result;
use crate::fields::ControlField;
use crate::landscape::slope_bound;
use crate::numerics::ComplexMatrix;
use crate::objective::{kinematic_gradient, objective_j};
use crate::propagation::{real_matmul, Split, SplitStepper};
use crate::systems::{ControlSystem, TargetGate};

const STALL_STEPS: usize = 50;
const STALL_SCALE: f64 = 1e-14;

/// −0.1 / (2N√T‖μ‖_F).
pub fn default_beta(system: &ControlSystem, t_final: f64) -> f64 {
    -0.1 / slope_bound(system.dim(), t_final, system.dipole().matrix())
}

/// y = exp(±i m ε dt) x row by row (μ eigenbasis).
fn kick(st: &SplitStepper, eps: f64, sign: f64, x: &Split, y: &mut Split) {
    let n = st.n;
    for (a, &ma) in st.m.iter().enumerate() {
        let (s, c) = (sign * ma * eps * st.dt).sin_cos();
        for j in a * n..(a + 1) * n {
            let (xr, xi) = (x.re[j], x.im[j]);
            y.re[j] = c * xr - s * xi;
            y.im[j] = c * xi + s * xr;
        }
    }
}

/// Re Tr(φ† iμ x) with both operands in the μ eigenbasis.
fn overlap(st: &SplitStepper, phi: &Split, x: &Split) -> f64 {
    let n = st.n;
    let mut acc = 0.0;
    for (a, &ma) in st.m.iter().enumerate() {
        let r = a * n..(a + 1) * n;
        let s: f64 = phi.re[r.clone()]
            .iter()
            .zip(&x.im[r.clone()])
            .zip(phi.im[r.clone()].iter().zip(&x.re[r]))
            .map(|((pr, xi), (pi, xr))| pr * xi - pi * xr)
            .sum();
        acc -= ma * s;
    }
    acc
}

fn to_basis(st: &SplitStepper, basis: &[f64], u: &Split, out: &mut Split) {
    real_matmul(st.n, basis, &u.re, &mut out.re);
    real_matmul(st.n, basis, &u.im, &mut out.im);
}

struct Sweeps {
    st: SplitStepper,
    /// Post-kick state Qᵀ K D U(t_c) of the latest forward sweep, per cell.
    post: Vec<Split>,
    /// Pre-kick costate in the μ basis from the latest backward sweep, per cell.
    costate: Vec<Split>,
    alpha: f64,
    beta: f64,
}

impl Sweeps {
    fn new(st: SplitStepper, cells: usize, alpha: f64, beta: f64) -> Self {
        let n = st.n;
        let blank = Split {
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        };
        Self {
            st,
            post: vec![blank.clone(); cells],
            costate: vec![blank; cells],
            alpha,
            beta,
        }
    }

    /// Plain propagation storing post-kick states; returns U(T).
    fn forward_plain(&mut self, eps: &[f64]) -> ComplexMatrix {
        let n = self.st.n;
        let mut u = Split::identity(n);
        let mut x = Split::identity(n);
        for (c, &e) in eps.iter().enumerate() {
            self.st.apply_half_drift(&mut u);
            to_basis(&self.st, &self.st.qt, &u, &mut x);
            kick(&self.st, e, 1.0, &x, &mut self.post[c]);
            to_basis(&self.st, &self.st.q, &self.post[c], &mut u);
            self.st.apply_half_drift(&mut u);
        }
        u.to_matrix()
    }

    /// Backward sweep from φ(T) = `terminal`; overwrites `eps` with ε̃ and
    /// returns the G values seen at each cell.
    fn backward(&mut self, terminal: &ComplexMatrix, eps: &mut [f64]) -> Vec<f64> {
        let n = self.st.n;
        let mut phi = Split::from_matrix(terminal);
        let mut psi = Split::identity(n);
        let mut g = vec![0.0; eps.len()];
        for c in (0..eps.len()).rev() {
            self.st.apply_half_drift_adjoint(&mut phi);
            to_basis(&self.st, &self.st.qt, &phi, &mut psi);
            g[c] = overlap(&self.st, &psi, &self.post[c]);
            eps[c] = self.alpha * eps[c] + self.beta * g[c];
            kick(&self.st, eps[c], -1.0, &psi, &mut self.costate[c]);
            to_basis(&self.st, &self.st.q, &self.costate[c], &mut phi);
            self.st.apply_half_drift_adjoint(&mut phi);
        }
        g
    }

    /// Forward sweep against the stored costates; overwrites `eps` with the new field.
    fn forward(&mut self, eps: &mut [f64]) -> ComplexMatrix {
        let n = self.st.n;
        let mut u = Split::identity(n);
        let mut x = Split::identity(n);
        for (c, e) in eps.iter_mut().enumerate() {
            self.st.apply_half_drift(&mut u);
            to_basis(&self.st, &self.st.qt, &u, &mut x);
            let g = overlap(&self.st, &self.costate[c], &x);
            *e = self.alpha * *e + self.beta * g;
            kick(&self.st, *e, 1.0, &x, &mut self.post[c]);
            to_basis(&self.st, &self.st.q, &self.post[c], &mut u);
            self.st.apply_half_drift(&mut u);
        }
        u.to_matrix()
    }
}

/// δJ/δε by one backward costate sweep (no field update).
#[cfg(test)]
pub(crate) fn costate_gradient(system: &ControlSystem, target: &TargetGate, field: &ControlField) -> Vec<f64> {
    let mut sw = Sweeps::new(SplitStepper::new(system, field.grid()), field.grid().n_points(), 1.0, 0.0);
    let mut eps = field.samples().to_vec();
    let u = sw.forward_plain(&eps);
    sw.backward(&kinematic_gradient(&u, target), &mut eps)
}

/// Runs type-1 (α = 0) or type-2 (α = 1) PMP iterations; effort counts iterations.
pub fn pmp_iterate(
    system: &ControlSystem,
    target: &TargetGate,
    field0: &ControlField,
    config: &PMPConfig,
) -> Result<OptimizationRun> {
    config.validate()?;
    let grid = *field0.grid();
    let n_dim = system.dim();
    let beta = config.beta.unwrap_or_else(|| default_beta(system, grid.t_final()));
    let resolved = PMPConfig {
        beta: Some(beta),
        ..*config
    };
    let mut rec = Recorder::new(system, target, grid, AlgorithmConfig::Pmp(resolved), config.record);
    if system.dim() != target.dim() {
        return Err(crate::Error::DimensionMismatch {
            expected: system.dim(),
            found: target.dim(),
        });
    }
    let mut sw = Sweeps::new(SplitStepper::new(system, &grid), grid.n_points(), config.alpha, beta);
    let mut eps = field0.samples().to_vec();
    let mut u = sw.forward_plain(&eps);
    let mut j = objective_j(&u, target).j;
    if !j.is_finite() {
        return Err(rec.non_finite());
    }
    rec.observe(0.0, &eps, j, &u, None)?;
    let stall_tol = STALL_SCALE * 4.0 * n_dim as f64;
    let mut quiet = 0usize;
    let mut iteration = 0usize;
    loop {
        if convergence_check(j, n_dim, config.convergence_threshold) {
            return Ok(rec.finish(Status::Converged));
        }
        if iteration >= config.max_iterations {
            return Ok(rec.finish(Status::MaxIter));
        }
        iteration += 1;
        sw.backward(&kinematic_gradient(&u, target), &mut eps);
        u = sw.forward(&mut eps);
        let j_new = objective_j(&u, target).j;
        if !j_new.is_finite() || eps.iter().any(|x| !x.is_finite()) {
            return Err(rec.non_finite());
        }
        quiet = if (j - j_new).abs() < stall_tol { quiet + 1 } else { 0 };
        j = j_new;
        rec.observe(iteration as f64, &eps, j, &u, None)?;
        if quiet >= STALL_STEPS && !convergence_check(j, n_dim, config.convergence_threshold) {
            return Ok(rec.finish(Status::Stalled));
        }
    }
}
