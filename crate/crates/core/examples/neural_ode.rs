//! Forward pass of a continuous-depth residual network: a single residual
//! layer, a full explicit-Euler trajectory, and a seeded particle ensemble
//! with its training loss.

use ctrlnet::dynamics::{
    integrate_ensemble, integrate_ode, loss_micro, resnet_step, Activation, ControlSchedule, Loss,
    ParticleEnsemble,
};
use ctrlnet::{Matrix, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ctrlnet::Result<()> {
    let x = Vector::from_element(1, 1.0);
    let layer = resnet_step(
        &x,
        &Matrix::from_element(1, 1, 0.0),
        &Vector::from_element(1, 0.5),
        0.01,
        Activation::Identity,
        None,
    )?;
    println!("one residual layer: 1.0 -> {:.6}", layer[0]);

    let ctrl = ControlSchedule::scalar(0.1, 1e-3, 0.0, 10.0, 1e-2)?;
    let traj = integrate_ode(&Vector::from_element(1, 1.5), &ctrl, Activation::Relu)?;
    let exact = (1.5 + 1e-3 / 0.1) * 1f64.exp() - 1e-3 / 0.1;
    println!(
        "relu flow from 1.5 to T = 10: {:.6} (continuous limit {:.6})",
        traj.last()[0],
        exact
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ens = ParticleEnsemble::uniform_scalar(50, 1.0, 2.0, 5.0, &mut rng)?;
    let finals = integrate_ensemble(&ens, &ctrl, Activation::Relu)?;
    let mean = finals.iter().map(|v| v[0]).sum::<f64>() / finals.len() as f64;
    let loss = loss_micro(&finals, ens.targets(), Loss::Square)?;
    println!("50 particles: final mean {mean:.4}, squared loss to y = 5: {loss:.4}");
    Ok(())
}
