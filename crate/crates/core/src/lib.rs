//! Continuous residual networks and their control.
//!
//! The crate is organised around the layers of the model:
//!
//! - [`dynamics`]: activations, the residual step, explicit-Euler integration of
//!   the neural ODE `x' = σ(w(t) x + b(t))` and the microscopic training loss.
//! - [`controllability`]: adjoint solves, bias controls built from costates,
//!   the duality pairing between state and costate, the explicit static
//!   control for scalar systems and the extended autonomous flow.
//! - [`meanfield`]: a first-order upwind finite-volume solver for the
//!   transport equation `∂ₜμ + ∂ₓ(σ(wx+b)μ) = 0`, particle push-forwards,
//!   1D Wasserstein distances and a Monte-Carlo mean-field loss.
//! - [`surrogate`]: a Gaussian-kernel surrogate of the loss landscape over
//!   `(w, b)`, with interpolation and ridge fits and an analytic gradient.
//! - [`optimize`]: projected gradient descent over a box of parameters.
//! - [`experiments`]: seeded, configuration-driven experiment runners that
//!   write CSV, SVG and a JSON manifest. The `ctrlnet` binary is a thin
//!   front end over this module.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controllability;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod meanfield;
pub mod optimize;
pub mod surrogate;

pub use error::{Error, Result};

/// Column vector of `f64`, used for states, biases and costates.
pub type Vector = nalgebra::DVector<f64>;
/// Dense `f64` matrix, used for weights.
pub type Matrix = nalgebra::DMatrix<f64>;
