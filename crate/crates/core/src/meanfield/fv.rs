use crate::dynamics::{Activation, ControlSchedule};
use crate::{Error, Result};

use super::Density1D;

/// Transport velocity `σ(w·x + b)`.
pub fn velocity_field(x: f64, w: f64, b: f64, act: Activation) -> f64 {
    act.apply(w * x + b)
}

/// Bookkeeping for one upwind step. Outflows are nonnegative masses leaving
/// through each boundary; inflow through a boundary is always zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassBalance {
    pub mass_before: f64,
    pub mass_after: f64,
    pub outflow_left: f64,
    pub outflow_right: f64,
}

impl MassBalance {
    /// `|Δmass + outflow| / mass_before`, zero for an empty density.
    pub fn relative_defect(&self) -> f64 {
        let defect =
            (self.mass_after - self.mass_before) + (self.outflow_left + self.outflow_right);
        if self.mass_before > 0.0 {
            defect.abs() / self.mass_before
        } else {
            defect.abs()
        }
    }
}

/// One conservative upwind step.
pub fn fv_step(rho: &Density1D, w: f64, b: f64, act: Activation, dt: f64) -> Result<Density1D> {
    fv_step_with_balance(rho, w, b, act, dt).map(|(next, _)| next)
}

/// One conservative upwind step together with its mass balance.
///
/// Cell `j` loses `dt/dx·(v⁺_{j+1/2} + v⁻_{j−1/2})` of its content and gains the
/// upwind inflow from its neighbours. The update is written in that form so
/// every term is nonnegative, which makes positivity exact in floating point
/// whenever the CFL bound `dt/dx·max_j(v⁺_{j+1/2} + v⁻_{j−1/2}) ≤ 1` holds. For
/// velocity fields of one sign this is the usual `dt·max|v|/dx ≤ 1`.
pub fn fv_step_with_balance(
    rho: &Density1D,
    w: f64,
    b: f64,
    act: Activation,
    dt: f64,
) -> Result<(Density1D, MassBalance)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config(format!(
            "finite-volume step must be positive, got {dt}"
        )));
    }
    let n = rho.len();
    let c = rho.cells();
    let v: Vec<f64> = (0..=n)
        .map(|j| velocity_field(rho.interface(j), w, b, act))
        .collect();
    if let Some((j, &bad)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::NonFinite {
            location: format!("velocity at interface {j}"),
            value: bad,
        });
    }
    let outflow_rate = |j: usize| v[j + 1].max(0.0) + (-v[j]).max(0.0);
    let max_rate = (0..n).map(outflow_rate).fold(0.0, f64::max);
    let ratio = dt / rho.dx();
    if ratio * max_rate > 1.0 {
        return Err(Error::Cfl {
            dt,
            admissible: rho.dx() / max_rate,
        });
    }

    let mut next = Vec::with_capacity(n);
    for j in 0..n {
        let keep = c[j] * (1.0 - ratio * outflow_rate(j));
        let from_left = if j > 0 { v[j].max(0.0) * c[j - 1] } else { 0.0 };
        let from_right = if j + 1 < n {
            (-v[j + 1]).max(0.0) * c[j + 1]
        } else {
            0.0
        };
        next.push(keep + ratio * (from_left + from_right));
    }
    let outflow_left = dt * (-v[0]).max(0.0) * c[0];
    let outflow_right = dt * v[n].max(0.0) * c[n - 1];
    let next = rho.with_cells(next)?;
    let balance = MassBalance {
        mass_before: rho.mass(),
        mass_after: next.mass(),
        outflow_left,
        outflow_right,
    };
    Ok((next, balance))
}

fn scalar_schedule(ctrl: &ControlSchedule) -> Result<()> {
    if ctrl.dim() != 1 {
        return Err(Error::Dimension {
            context: "mean-field schedule (one-dimensional transport)",
            expected: 1,
            got: ctrl.dim(),
        });
    }
    Ok(())
}

/// Density at the final time, advancing with `(w, b)` frozen at the left end of each step.
pub fn solve_meanfield(
    rho0: &Density1D,
    ctrl: &ControlSchedule,
    act: Activation,
) -> Result<Density1D> {
    scalar_schedule(ctrl)?;
    let mut rho = rho0.clone();
    for k in 0..ctrl.steps() {
        let t = ctrl.time(k);
        rho = fv_step(
            &rho,
            ctrl.weight_at(t)[(0, 0)],
            ctrl.bias_at(t)[0],
            act,
            ctrl.dt(),
        )?;
    }
    Ok(rho)
}

/// Like [`solve_meanfield`] but keeps `(t, density)` every `every` steps,
/// always including the initial and final time.
pub fn solve_meanfield_snapshots(
    rho0: &Density1D,
    ctrl: &ControlSchedule,
    act: Activation,
    every: usize,
) -> Result<Vec<(f64, Density1D)>> {
    scalar_schedule(ctrl)?;
    let every = every.max(1);
    let mut rho = rho0.clone();
    let mut out = vec![(ctrl.t0(), rho.clone())];
    for k in 0..ctrl.steps() {
        let t = ctrl.time(k);
        rho = fv_step(
            &rho,
            ctrl.weight_at(t)[(0, 0)],
            ctrl.bias_at(t)[0],
            act,
            ctrl.dt(),
        )?;
        if (k + 1) % every == 0 || k + 1 == ctrl.steps() {
            out.push((ctrl.time(k + 1), rho.clone()));
        }
    }
    Ok(out)
}
