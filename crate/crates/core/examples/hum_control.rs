//! Exact terminal control of a linear system with the Hilbert Uniqueness
//! Method: the bias is the sum of particle costates, and the terminal
//! costate solves a Gramian system.

use ctrlnet::controllability::{duality_pairing, forward_linear, hum_solve_terminal};
use ctrlnet::dynamics::ControlSchedule;
use ctrlnet::{Matrix, Vector};

fn main() -> ctrlnet::Result<()> {
    let w = Matrix::from_row_slice(2, 2, &[0.2, -0.9, 0.4, -0.3]);
    let schedule = ControlSchedule::constant(w, Vector::zeros(2), 0.0, 1.0, 1e-3)?;
    let x0 = Vector::from_vec(vec![1.0, -0.5]);
    let y = Vector::from_vec(vec![-0.3, 2.0]);

    let sol = hum_solve_terminal(&schedule, &x0, &y)?;
    let xs = forward_linear(&schedule, &x0, &sol.bias)?;
    println!("Gramian condition number: {:.3}", sol.gramian_condition);
    println!("terminal costate: {:?}", sol.lambda_terminal.as_slice());
    println!(
        "reached {:?}, target {:?}",
        xs.last().unwrap().as_slice(),
        y.as_slice()
    );

    let pairing = duality_pairing(&schedule, &sol.bias, &sol.lambda_terminal)?;
    println!(
        "duality: x(T)·λ_T = {:.8}, ∫ b·Σλ dt = {:.8}, relative gap {:.1e}",
        pairing.terminal,
        pairing.quadrature,
        pairing.relative_gap()
    );

    let stuck = hum_solve_terminal(
        &ControlSchedule::scalar(0.0, 0.0, 0.0, 1.0, 1e-2)?,
        &Vector::zeros(2),
        &Vector::from_vec(vec![1.0, -1.0]),
    );
    println!(
        "two identical particles sent to different targets: {}",
        stuck.unwrap_err()
    );
    Ok(())
}
