//! Explicit time-constant biases that steer a scalar state to a target, for
//! the power and exponential weight profiles, checked against the
//! closed-form flow.

use ctrlnet::controllability::{static_control, ClosedFormFlow, FlowCase};
use ctrlnet::dynamics::{integrate_final, Activation, ControlSchedule};
use ctrlnet::Vector;

fn main() -> ctrlnet::Result<()> {
    let (x0, y, omega) = (2.0, 0.0, -3.0);
    for (label, case, alpha) in [
        ("power, α = 0", FlowCase::Power, 0.0),
        ("power, α = 4", FlowCase::Power, 4.0),
        ("exp, α = 4", FlowCase::Exp, 4.0),
    ] {
        let schedule = match case {
            FlowCase::Power => ControlSchedule::power(omega, alpha, 0.0, 0.0, 1.0, 1e-3)?,
            FlowCase::Exp => ControlSchedule::exp(omega, alpha, 0.0, 0.0, 1.0, 1e-3)?,
        };
        let ctl = static_control(x0, y, &schedule)?;
        let euler = integrate_final(
            &Vector::from_element(1, x0),
            &schedule.with_scalar_bias(ctl.bias),
            Activation::Identity,
        )?;
        let exact = ClosedFormFlow::new(case, omega, alpha, 0.0).eval(ctl.bias, x0, 1.0);
        println!(
            "{label:>13}: b = {:+.6e}, Euler Φ(1) = {:+.2e}, closed form Φ(1) = {:+.2e}",
            ctl.bias, euler[0], exact
        );
    }
    Ok(())
}
