//! Microscopic dynamics: the residual step, the neural ODE and its loss.

mod activation;
mod ensemble;
mod ode;
mod schedule;

pub use activation::Activation;
pub use ensemble::{integrate_ensemble, loss_micro, Loss, ParticleEnsemble};
pub use ode::{integrate_final, integrate_ode, resnet_step, Trajectory};
pub(crate) use schedule::{exp_antiderivative, power_antiderivative};
pub use schedule::{ControlSchedule, Profile};
