//! Landscape-structure metrics: slope, curvature, saddle proximity, path
//! directness and the dynamical Gramian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{l2_distance, ControlField};
use crate::numerics::{hermitian_eigendecomposition, ComplexMatrix, C64};
use crate::objective::{evaluate, kinematic_gradient, GradientField, HessianKernel};
use crate::propagation::DipoleTrajectory;
use crate::systems::{ControlSystem, TargetGate};

pub const DEFAULT_ZERO_FACTOR: f64 = 1e-6;
pub const GRAMIAN_RANK_TOL: f64 = 1e-10;

/// 𝒢 = (∫ g² dt)^½.
pub fn slope_metric(g: &GradientField) -> f64 {
    g.norm_sqr().sqrt()
}

/// 2N√T‖μ‖_F.
pub fn slope_bound(n: usize, t_final: f64, mu: &ComplexMatrix) -> f64 {
    2.0 * n as f64 * t_final.sqrt() * mu.frobenius_norm()
}

/// ∫ H(t, t) dt.
pub fn hessian_trace(kernel: &HessianKernel) -> f64 {
    kernel.trace()
}

/// Curvature along the unit gradient direction, 𝒞 = ∫∫ û H û.
pub fn local_curvature(kernel: &HessianKernel, g: &GradientField) -> Result<f64> {
    let norm = slope_metric(g);
    if norm == 0.0 {
        return Err(Error::Degenerate("gradient; curvature direction is undefined"));
    }
    let n = kernel.dim();
    if g.samples.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.samples.len(),
        });
    }
    let u: Vec<f64> = g.samples.iter().map(|x| x / norm).collect();
    let mut acc = 0.0;
    for k in 0..n {
        let row = &kernel.matrix[k * n..(k + 1) * n];
        let s: f64 = row.iter().zip(&u).map(|(m, x)| m * x).sum();
        acc += u[k] * s;
    }
    Ok(acc * kernel.grid.dt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianSignature {
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_zero: usize,
    pub zero_threshold: f64,
}

impl HessianSignature {
    /// (h₊, h₋, h₀) among the N² directions the kernel can span; the
    /// remaining null tail of the discretized kernel is dropped from h₀.
    pub fn non_null(&self, n_dim: usize) -> (usize, usize, usize) {
        let total = self.n_positive + self.n_negative + self.n_zero;
        let tail = total.saturating_sub(n_dim * n_dim);
        (self.n_positive, self.n_negative, self.n_zero.saturating_sub(tail))
    }
}

pub fn hessian_signature(kernel: &HessianKernel, zero_factor: f64) -> HessianSignature {
    signature_of(&kernel.eigenvalues(), zero_factor)
}

/// Census with zero band |λ| < factor·max|λ|.
pub fn signature_of(eigenvalues: &[f64], zero_factor: f64) -> HessianSignature {
    let max = eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let threshold = zero_factor * max;
    let mut sig = HessianSignature {
        n_positive: 0,
        n_negative: 0,
        n_zero: 0,
        zero_threshold: threshold,
    };
    for &x in eigenvalues {
        if x.abs() < threshold || x == 0.0 {
            sig.n_zero += 1;
        } else if x > 0.0 {
            sig.n_positive += 1;
        } else {
            sig.n_negative += 1;
        }
    }
    sig
}

/// Census predicted at the critical value J = 4m: ((N−m)², m², 2Nm − 2m²).
pub fn critical_census(n: usize, m: usize) -> (usize, usize, usize) {
    ((n - m) * (n - m), m * m, 2 * n * m - 2 * m * m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleRecord {
    #[serde(rename = "J_at_min")]
    pub j_at_min: f64,
    #[serde(rename = "S_min")]
    pub s_min: f64,
    pub nearest_m: usize,
}

/// 𝒮 = 𝒩·Σᵢ(1 − |Re Eᵢ|) over the eigenvalues Eᵢ of V = W†U(T).
pub fn saddle_metric(u_final: &ComplexMatrix, target: &TargetGate, j: f64) -> Result<f64> {
    let n = u_final.dim();
    let jmax = 4.0 * n as f64;
    if !(j > 0.0 && j < jmax) {
        return Err(Error::UndefinedAtCriticalPoint("saddle metric"));
    }
    let v = target.matrix().adjoint().matmul(u_final);
    // V is unitary, so Re of its eigenvalues are the eigenvalues of (V + V†)/2.
    let re = hermitian_eigendecomposition(&(&v + &v.adjoint()).scale_real(0.5))?;
    let sum: f64 = re.eigenvalues.iter().map(|x| 1.0 - x.abs().min(1.0)).sum();
    let norm = if j <= 2.0 * n as f64 { 2.0 / j } else { 2.0 / (jmax - j) };
    Ok((norm * sum).clamp(0.0, 1.0))
}

/// Saddle index m ∈ [1, N−1] nearest to J, or None outside the band |J − 4m| < `band`.
pub fn near_saddle(j: f64, n: usize, band: f64) -> Option<usize> {
    if n < 2 {
        return None;
    }
    let m = (j / 4.0).round().clamp(1.0, (n - 1) as f64) as usize;
    ((j - 4.0 * m as f64).abs() < band).then_some(m)
}

/// Path length over end-to-end distance for a sequence of fields.
pub fn path_ratio(fields: &[ControlField]) -> Result<f64> {
    if fields.len() < 2 {
        return Err(Error::param("fields", "need at least two fields"));
    }
    let length: f64 = fields.windows(2).map(|w| w[0].distance(&w[1])).sum();
    let net = fields[0].distance(&fields[fields.len() - 1]);
    ratio_from(length, net)
}

pub(crate) fn ratio_from(length: f64, net: f64) -> Result<f64> {
    if net == 0.0 {
        return Err(Error::Degenerate("net displacement in path ratio"));
    }
    Ok(length / net)
}

/// Same as [`path_ratio`] on raw sample vectors sharing one grid spacing.
pub fn path_ratio_samples(fields: &[Vec<f64>], dt: f64) -> Result<f64> {
    if fields.len() < 2 {
        return Err(Error::param("fields", "need at least two fields"));
    }
    let length: f64 = fields.windows(2).map(|w| l2_distance(&w[0], &w[1], dt)).sum();
    let net = l2_distance(&fields[0], &fields[fields.len() - 1], dt);
    ratio_from(length, net)
}

/// G_{ij,kl} = ∫ ⟨i|U(T)μ(t)|j⟩⟨k|μ(t)U†(T)|l⟩ dt with row-major pair indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramianMatrix {
    pub matrix: ComplexMatrix,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub condition_number: f64,
    pub rank: usize,
}

impl GramianMatrix {
    /// G with its column pair (k, l) read as (l, k); this equals −∫ν[Uμ]ν[Uμ]† dt and is Hermitian.
    pub fn hermitian_form(&self) -> ComplexMatrix {
        let nn = self.matrix.dim();
        let n = (nn as f64).sqrt().round() as usize;
        ComplexMatrix::from_fn(nn, |r, c| {
            let (k, l) = (c / n, c % n);
            self.matrix[(r, l * n + k)]
        })
    }

    /// G·ν(Xᵀ): the rate of change of ν(U(T)) when the field follows −δJ/δε and X = ∇F.
    pub fn apply_kinematic(&self, grad: &ComplexMatrix) -> Vec<C64> {
        let v: Vec<C64> = grad.transpose().into_vec();
        let nn = self.matrix.dim();
        (0..nn)
            .map(|r| self.matrix.row(r).iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

pub fn gramian(dipole: &DipoleTrajectory, u_final: &ComplexMatrix) -> Result<GramianMatrix> {
    let n = u_final.dim();
    let nn = n * n;
    let dt = dipole.grid().dt();
    let cells = dipole.len();
    let mut a = nalgebra::DMatrix::<C64>::zeros(nn, cells);
    let mut b = nalgebra::DMatrix::<C64>::zeros(cells, nn);
    let u_adj = u_final.adjoint();
    for (c, mu_t) in dipole.matrices().iter().enumerate() {
        let left = u_final.matmul(mu_t);
        let right = mu_t.matmul(&u_adj);
        for r in 0..nn {
            a[(r, c)] = left.as_slice()[r] * dt;
            b[(c, r)] = right.as_slice()[r];
        }
    }
    let g = a * b;
    let matrix = ComplexMatrix::from_fn(nn, |i, j| g[(i, j)]);
    let mut out = GramianMatrix {
        matrix,
        singular_values: Vec::new(),
        condition_number: f64::INFINITY,
        rank: 0,
    };
    let h = out.hermitian_form();
    let scale = h.frobenius_norm();
    if h.hermitian_violation() > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian {
            violation: h.hermitian_violation(),
            tolerance: 1e-8 * scale,
        });
    }
    let mut sv: Vec<f64> = hermitian_eigendecomposition(&h)?
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .collect();
    sv.sort_by(|p, q| q.total_cmp(p));
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    out.rank = sv.iter().filter(|&&s| s > GRAMIAN_RANK_TOL * smax).count();
    out.condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    out.singular_values = sv;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramianFlowCheck {
    pub residual: f64,
    pub predicted_norm: f64,
    pub observed_norm: f64,
}

/// Relative mismatch between `observed` and the Gramian prediction G·ν(∇Fᵀ).
pub fn gramian_flow_residual(g: &GramianMatrix, kinematic_grad: &ComplexMatrix, observed: &[C64]) -> GramianFlowCheck {
    let predicted = g.apply_kinematic(kinematic_grad);
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let diff: Vec<C64> = predicted.iter().zip(observed).map(|(p, o)| p - o).collect();
    let predicted_norm = norm(&predicted);
    let observed_norm = norm(observed);
    let residual = if predicted_norm > 0.0 {
        norm(&diff) / predicted_norm
    } else {
        norm(&diff)
    };
    GramianFlowCheck {
        residual,
        predicted_norm,
        observed_norm,
    }
}

/// Compares du/ds from an explicit flow step of length `ds` with G·∇F at `field`.
pub fn gramian_flow_check(
    system: &ControlSystem,
    target: &TargetGate,
    field: &ControlField,
    ds: f64,
) -> Result<GramianFlowCheck> {
    let trajectory = crate::propagation::propagate(system, field)?;
    let dipole = crate::propagation::dipole_in_time(system, &trajectory);
    let u = trajectory.u_final();
    let g = gramian(&dipole, u)?;
    let (_, grad) = evaluate(system, target, field)?;
    let stepped: Vec<f64> = field
        .samples()
        .iter()
        .zip(&grad.samples)
        .map(|(x, d)| x - ds * d)
        .collect();
    let stepped = ControlField::new(*field.grid(), stepped)?;
    let u_next = crate::propagation::propagate_final(system, &stepped)?;
    let observed: Vec<C64> = u_next
        .as_slice()
        .iter()
        .zip(u.as_slice())
        .map(|(a, b)| (a - b) / ds)
        .collect();
    Ok(gramian_flow_residual(&g, &kinematic_gradient(u, target), &observed))
}

#[derive(Clone, Debug)]
pub struct CriticalRefinement {
    pub field: ControlField,
    pub j: f64,
    pub slope: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Drives 𝒢 to zero from `field` by Levenberg–Marquardt on δJ/δε with the
/// exact discrete Hessian, landing on the nearest critical point (saddle or
/// extremum alike). Stops once 𝒢 < `slope_tol`.
pub fn refine_critical_point(
    system: &ControlSystem,
    target: &TargetGate,
    field: &ControlField,
    slope_tol: f64,
    max_iterations: usize,
) -> Result<CriticalRefinement> {
    use nalgebra::{DMatrix, DVector, SymmetricEigen};
    let grid = *field.grid();
    let n = grid.n_points();
    let mut x = field.clone();
    let (mut value, mut grad) = evaluate(system, target, &x)?;
    let mut slope = slope_metric(&grad);
    let mut damping = 1e-2;
    let mut iterations = 0;
    while slope >= slope_tol && iterations < max_iterations {
        iterations += 1;
        let traj = crate::propagation::propagate(system, &x)?;
        let dipole = crate::propagation::dipole_in_time(system, &traj);
        let kernel = crate::objective::hessian_kernel(&traj, &dipole, target)?;
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &kernel.matrix));
        let scale = eig.eigenvalues.amax().powi(2);
        let coeffs = eig.eigenvectors.transpose() * DVector::from_column_slice(&grad.samples);
        let mut improved = false;
        while damping < 1e8 {
            let mu = damping * scale;
            let d = DVector::from_iterator(
                n,
                coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| -c * l / (l * l + mu)),
            );
            let step = &eig.eigenvectors * d;
            let trial: Vec<f64> = x.samples().iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial = ControlField::new(grid, trial)?;
            let (v2, g2) = evaluate(system, target, &trial)?;
            let s2 = slope_metric(&g2);
            if s2 < slope {
                (x, value, grad, slope) = (trial, v2, g2, s2);
                damping = (damping / 10.0).max(1e-14);
                improved = true;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok(CriticalRefinement {
        field: x,
        j: value.value.j,
        slope,
        iterations,
        converged: slope < slope_tol,
    })
}
