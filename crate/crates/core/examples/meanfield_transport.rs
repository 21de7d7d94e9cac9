//! Mean-field limit: a Gaussian density transported by the upwind
//! finite-volume scheme, with the per-step mass balance and a comparison
//! against pushed-forward particles in the Wasserstein-1 distance.

use ctrlnet::dynamics::{Activation, ControlSchedule};
use ctrlnet::meanfield::{
    fv_step_with_balance, push_forward_particles, solve_meanfield, wasserstein1_cdf, Density1D,
    GaussianSpread,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ctrlnet::Result<()> {
    let rho0 = Density1D::gaussian(0.0, 3.0, 30, 1.5, GaussianSpread::Variance(0.1))?;
    let (w, b) = (0.125, 1.25e-3);

    let (_, balance) = fv_step_with_balance(&rho0, w, b, Activation::Relu, 1e-2)?;
    println!(
        "one step: mass {:.12} -> {:.12}, outflow right {:.3e}, balance defect {:.1e}",
        balance.mass_before,
        balance.mass_after,
        balance.outflow_right,
        balance.relative_defect()
    );

    let ctrl = ControlSchedule::scalar(w, b, 0.0, 1.0, 1e-2)?;
    let rho_t = solve_meanfield(&rho0, &ctrl, Activation::Relu)?;
    println!("mean moves from {:.4} to {:.4}", rho0.mean(), rho_t.mean());

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [100, 1000, 10000] {
        let particles = push_forward_particles(n, &rho0, &ctrl, Activation::Relu, &mut rng)?;
        println!(
            "n = {n:>5}: W1(particles, finite volumes) = {:.4}",
            wasserstein1_cdf(&particles, &rho_t)
        );
    }
    Ok(())
}
