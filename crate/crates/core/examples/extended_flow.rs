//! Particles with individual targets controlled by one network: each carries
//! its initial datum and target as frozen coordinates, and a static feedback
//! of those coordinates acts as the bias.

use ctrlnet::controllability::{integrate_extended, static_feedback};
use ctrlnet::dynamics::ControlSchedule;
use ctrlnet::Vector;

fn main() -> ctrlnet::Result<()> {
    let schedule = ControlSchedule::exp(-3.0, 4.0, 0.0, 0.0, 1.0, 1e-3)?;
    let feedback = static_feedback(&schedule)?;
    for (x0, y) in [(1.2, -0.8), (1.5, 0.0), (1.9, 0.7)] {
        let path = integrate_extended(
            &Vector::from_element(1, x0),
            &Vector::from_element(1, y),
            &schedule,
            &feedback,
        )?;
        let end = path.last().unwrap();
        println!(
            "x0 = {x0}, y = {y:+}: x1(T) = {:+.5}, frozen (x2, x3) = ({}, {})",
            end.x1[0], end.x2[0], end.x3[0]
        );
    }
    Ok(())
}
