//! One-dimensional mean-field transport `∂ₜμ + ∂ₓ(σ(w(t)x + b(t))μ) = 0`.
//!
//! Densities live on a uniform cell grid ([`Density1D`]) and are advanced by a
//! first-order upwind finite-volume scheme with zero inflow and free outflow at
//! the boundaries. The particle side ([`SampleSet`], [`push_forward_particles`])
//! realises `μ_T = Φ_T # μ_0` by pushing samples through the neural ODE, and the
//! two are compared with the exact one-dimensional Wasserstein-1 distance.

mod density;
mod fv;
mod loss;
mod samples;

pub use density::{Density1D, GaussianSpread};
pub use fv::{
    fv_step, fv_step_with_balance, solve_meanfield, solve_meanfield_snapshots, velocity_field,
    MassBalance,
};
pub use loss::{loss_meanfield, MonteCarloEstimate};
pub use samples::{
    push_forward_particles, wasserstein1, wasserstein1_cdf, Cdf, SampleSet, Sampler,
};
