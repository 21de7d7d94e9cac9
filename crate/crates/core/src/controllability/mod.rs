//! Linear controllability of the neural ODE with identity activation.
//!
//! Stacking `M` particles gives `x' = A(t)x + B(t)u` with `A = I_M ⊗ w(t)` and
//! `B = 𝟙_M ⊗ I_d`: every particle sees the same weights and one shared bias.
//! The costate `λ' = -Aᵀλ` pairs with the state through
//! `x(T)·λ(T) = ∫ u·Bᵀλ dt` when `x(t0) = 0`, and choosing `u = Bᵀλ = Σᵢ λᵢ`
//! gives the bias control reconstructed by [`hum_solve_terminal`].

mod adjoint;
mod extended;
mod hum;
mod static_control;

pub use adjoint::{adjoint_solve, forward_linear, AdjointState};
pub use extended::{integrate_extended, static_feedback, ExtendedState};
pub use hum::{
    duality_gap, duality_pairing, hum_bias, hum_solve_terminal, DualityPairing, HumSolution,
};
pub use static_control::{
    c1_c2, closed_form_flow, static_control, ClosedFormFlow, CoefficientPair, FlowCase,
    StaticControl,
};
