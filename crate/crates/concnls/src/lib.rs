//! Numerical tools for the concave-regularized nonlinear Schrödinger model:
//! radial ground states by shooting, constrained minimization of the bosonic
//! energy, a radial self-consistent field for fermions, two-center binding
//! states, and verification suites for the exact scaling laws and limits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bosonic;
pub mod error;
pub mod exec;
pub mod fermionic;
pub mod grid;
mod linalg;
pub mod model;
mod ode;
pub mod shoot;

pub use error::{Error, Result};
pub use model::ModelParams;
