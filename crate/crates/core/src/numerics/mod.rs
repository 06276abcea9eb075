//! Dense complex linear algebra used throughout the crate.

mod eigen;
mod expm;
mod haar;
mod matrix;
pub mod rng;

pub use eigen::{hermitian_eigendecomposition, symmetric_eigenvalues, Spectrum};
pub use expm::matrix_exponential;
pub use haar::{haar_from_rng, haar_random_unitary};
pub use matrix::{devectorize, vectorize, ComplexMatrix, C64};
pub(crate) use matrix::I;
#[cfg(test)]
pub(crate) use matrix::ONE;
