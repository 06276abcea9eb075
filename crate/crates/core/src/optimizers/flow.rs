//! Gradient flow dε/ds = −δJ/δε(t) − λε(t) integrated with the Dormand–Prince 5(4) pair.

use super::{convergence_check, AlgorithmConfig, FlowConfig, OptimizationRun, Recorder, Status};
use crate::error::Result;
use crate::fields::ControlField;
use crate::objective::{Evaluation, Evaluator};
use crate::systems::{ControlSystem, TargetGate};

const A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const STALL_STEPS: usize = 50;
const STALL_SCALE: f64 = 1e-14;

struct Rhs {
    ev: Evaluator,
    penalty: f64,
    grad: Vec<f64>,
}

impl Rhs {
    /// Writes the flow velocity at `y` into `k`.
    fn eval(&mut self, y: &[f64], k: &mut [f64]) -> Result<Evaluation> {
        let e = self.ev.value_and_gradient(y, &mut self.grad)?;
        for ((ki, g), yi) in k.iter_mut().zip(&self.grad).zip(y) {
            *ki = -g - self.penalty * yi;
        }
        Ok(e)
    }
}

fn scaled_rms(v: &[f64], y: &[f64], y_new: &[f64], cfg: &FlowConfig) -> f64 {
    let sum: f64 = v
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / v.len() as f64).sqrt()
}

/// Starting step from the local Lipschitz estimate.
fn initial_step(rhs: &mut Rhs, y: &[f64], f0: &[f64], cfg: &FlowConfig) -> Result<f64> {
    let d0 = scaled_rms(y, y, y, cfg);
    let d1 = scaled_rms(f0, y, y, cfg);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    rhs.eval(&y1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_rms(&diff, y, y, cfg) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).clamp(cfg.h_min, cfg.h_max))
}

/// Integrates the flow from `field0` until J ≤ threshold·4N, `max_iterations`
/// accepted steps, or the controller stalls.
pub fn gradient_flow(
    system: &ControlSystem,
    target: &TargetGate,
    field0: &ControlField,
    config: &FlowConfig,
) -> Result<OptimizationRun> {
    config.validate()?;
    let grid = *field0.grid();
    let n_dim = system.dim();
    let mut rec = Recorder::new(system, target, grid, AlgorithmConfig::GradientFlow(*config), config.record);
    let mut rhs = Rhs {
        ev: Evaluator::new(system, target, &grid)?,
        penalty: config.fluence_penalty,
        grad: vec![0.0; grid.n_points()],
    };
    let len = grid.n_points();
    let mut y = field0.samples().to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; len]; 7];
    let e0 = rhs.eval(&y, &mut k[0])?;
    let mut j = e0.value.j;
    if !j.is_finite() {
        return Err(rec.non_finite());
    }
    rec.observe(0.0, &y, j, &e0.u_final, Some(&rhs.grad))?;
    if convergence_check(j, n_dim, config.convergence_threshold) {
        return Ok(rec.finish(Status::Converged));
    }

    let mut h = initial_step(&mut rhs, &y, &k[0], config)?;
    let mut s = 0.0;
    let mut stage = vec![0.0; len];
    let mut err = vec![0.0; len];
    let mut quiet = 0usize;
    let stall_tol = STALL_SCALE * 4.0 * n_dim as f64;

    while rec.effort() < config.max_iterations {
        for i in 0..6 {
            for (idx, out) in stage.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (a, kk) in A[i].iter().zip(&k) {
                    acc += a * kk[idx];
                }
                *out = y[idx] + h * acc;
            }
            if i < 5 {
                let (_, rest) = k.split_at_mut(i + 1);
                rhs.eval(&stage, &mut rest[0])?;
            }
        }
        // `stage` now holds the fifth-order solution; its velocity is k7.
        let (head, tail) = k.split_at_mut(6);
        let e_new = rhs.eval(&stage, &mut tail[0])?;
        let j_new = e_new.value.j;
        for (idx, out) in err.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (e, kk) in E.iter().zip(head.iter().chain(tail.iter())) {
                acc += e * kk[idx];
            }
            *out = h * acc;
        }
        let err_norm = scaled_rms(&err, &y, &stage, config);
        if !j_new.is_finite() || !err_norm.is_finite() {
            return Err(rec.non_finite());
        }
        let ascent = config.fluence_penalty == 0.0 && j_new > j;
        if err_norm <= 1.0 && !ascent {
            s += h;
            let dj = (j - j_new).abs();
            std::mem::swap(&mut y, &mut stage);
            k.swap(0, 6);
            j = j_new;
            rec.observe(s, &y, j, &e_new.u_final, Some(&rhs.grad))?;
            if convergence_check(j, n_dim, config.convergence_threshold) {
                return Ok(rec.finish(Status::Converged));
            }
            quiet = if dj < stall_tol { quiet + 1 } else { 0 };
            if quiet >= STALL_STEPS {
                return Ok(rec.finish(Status::Stalled));
            }
            let factor = if err_norm == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h = (h * factor).clamp(config.h_min, config.h_max);
        } else {
            rec.reject();
            if h <= config.h_min {
                return Ok(rec.finish(Status::Stalled));
            }
            let factor = if err_norm <= 1.0 {
                0.5
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            };
            h = (h * factor).max(config.h_min);
        }
    }
    Ok(rec.finish(Status::MaxIter))
}
