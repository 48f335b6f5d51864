//! L1 adaptive output-feedback control for non-square MIMO plants.
//!
//! The crate is organised bottom-up:
//!
//! * [`matlib`]: dense kernels (LU, QR, SVD, eigenvalues, `expm`, Lyapunov).
//! * [`lti`]: state-space algebra, induced L1 norms, transmission zeros and
//!   fixed-step simulation.
//! * [`interactor`]: right interactor realizations and the coupling
//!   matrices `(T_z, B̄)` that turn the plant into a cascade.
//! * [`design`]: offline synthesis of the predictor, filters and all scalar
//!   constants, with feasibility and performance-bound checks.
//! * [`runtime`]: the online controller (predictor, projection-based
//!   adaptive laws, control law) and the closed-loop reference system.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root pin the double-precision instantiation used by the
//! harness.

pub mod design;
pub mod error;
pub mod interactor;
pub mod lti;
pub mod matlib;
pub mod runtime;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{lit, Real, Tolerances};

pub type Mat = matlib::Matrix<f64>;
pub type Mat32 = matlib::Matrix<f32>;
pub type System = lti::StateSpace<f64>;
pub type System32 = lti::StateSpace<f32>;
pub type Interactor = interactor::InteractorRealization<f64>;
pub type Plant = design::PlantSpec<f64>;
pub type Design = design::DesignArtifacts<f64>;
pub type Controller = runtime::Controller<f64>;
pub type ReferenceSystem = runtime::ReferenceSystem<f64>;
