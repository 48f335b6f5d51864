//! Dense real-matrix kernels: factorizations, spectra, equation solving and
//! the matrix exponential.
//!
//! Everything here is a pure function on immutable inputs.

mod decomp;
mod eigen;
mod expm;
mod lyapunov;
mod matrix;
mod place;

pub use decomp::{
    cholesky_upper, inverse, norm2, null_space, pinv_left, rank, singular_values, solve, svd, Lu, Qr, Svd,
};
pub use eigen::{
    eigenvalues, is_hurwitz, require_hurwitz, spectral_abscissa, symmetric_eigenvalues, symmetric_extremes,
};
pub use expm::expm;
pub use lyapunov::{lyapunov_kron, lyapunov_residual, solve_lyapunov};
pub use matrix::{dot, vec_norm2, vec_norm_inf, Matrix};
pub use place::{
    complex_embedding, place_output_injection, require_detectable, uncontrollable_modes, unobservable_modes,
};
