//! Gaussian-kernel surrogate `ℒ̂(p) = Σₙ αₙ k_γ(p, pₙ)` of a loss landscape over
//! the two-parameter space `p = (w, b)`.
//!
//! Kernel systems at small length scales are badly conditioned, so fitting
//! factorises once (escalating a diagonal jitter only if the factorisation
//! breaks down) and then refines the coefficients with residuals evaluated in
//! compensated arithmetic. Coefficients are kept as unevaluated `hi + lo`
//! pairs, which lets the surrogate reproduce its node values far below the
//! level that plain double-precision sums allow when the `αₙ` are large and
//! of alternating sign.

mod compensated;
mod dd;
mod fit;
mod grid;
mod kernel;

pub use compensated::{two_prod, two_sum, CompensatedSum};
pub use fit::{
    fit_interpolation, fit_ridge, fit_ridge_scaled, relative_error_field, relative_errors,
    surrogate_eval, surrogate_grad, ErrorField, FitMethod, FitReport, KernelSurrogate,
};
pub use grid::{stratified_nodes, ParamGrid};
pub use kernel::{kernel_eval, kernel_matrix, AxisScale, ParamPoint};
