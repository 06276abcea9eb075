//! Optimal control of unitary transformations with control-landscape diagnostics.
//!
//! A [`systems::ControlSystem`] pairs a diagonal drift H₀ with a real symmetric
//! dipole μ; fields ε(t) drive H = H₀ − μ·ε(t) toward a target gate W by
//! minimizing J = ‖W − U(T)‖²_F.

pub mod error;
pub mod fields;
pub mod harness;
pub mod landscape;
pub mod lie;
pub mod numerics;
pub mod objective;
pub mod optimizers;
pub mod propagation;
pub mod systems;

pub use error::{Error, Result};
