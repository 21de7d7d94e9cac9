use serde::Serialize;

use super::{Activation, ControlSchedule, Profile};
use crate::{Error, Matrix, Result, Vector};

/// States at every grid time of a schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
}

impl Trajectory {
    pub fn last(&self) -> &Vector {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// First component of each state, convenient for scalar systems.
    pub fn scalar_path(&self) -> Vec<f64> {
        self.states.iter().map(|x| x[0]).collect()
    }
}

/// One residual layer `A·x + dt·σ(w·x + b)`. `a = None` means `A = I`.
pub fn resnet_step(
    x: &Vector,
    w: &Matrix,
    b: &Vector,
    dt: f64,
    act: Activation,
    a: Option<&Matrix>,
) -> Result<Vector> {
    let d = x.len();
    if !(dt > 0.0) {
        return Err(Error::config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    check_dims(d, w, b)?;
    let carried = match a {
        Some(a) => {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::Dimension {
                    context: "residual matrix A",
                    expected: d,
                    got: a.nrows().max(a.ncols()),
                });
            }
            a * x
        }
        None => x.clone(),
    };
    let pre = w * x + b;
    let out = carried + act.apply_vec(&pre) * dt;
    if let Some((i, v)) = out.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite {
            location: format!("entry {i} of the residual step output"),
            value: *v,
        });
    }
    Ok(out)
}

fn check_dims(d: usize, w: &Matrix, b: &Vector) -> Result<()> {
    if w.nrows() != d || w.ncols() != d {
        return Err(Error::Dimension {
            context: "weight matrix",
            expected: d,
            got: w.nrows().max(w.ncols()),
        });
    }
    if b.len() != d {
        return Err(Error::Dimension {
            context: "bias",
            expected: d,
            got: b.len(),
        });
    }
    Ok(())
}

/// Explicit-Euler solve of `x' = σ(w(t)x + b(t))`, `x(t0) = x0`, keeping every grid state.
pub fn integrate_ode(x0: &Vector, ctrl: &ControlSchedule, act: Activation) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(ctrl.steps() + 1);
    states.push(x0.clone());
    euler_run(x0, ctrl, act, |_, x| states.push(x.clone()))?;
    Ok(Trajectory {
        times: ctrl.times(),
        states,
    })
}

/// Final state of [`integrate_ode`] without storing the path. Bit-identical to
/// `integrate_ode(..).last()`.
pub fn integrate_final(x0: &Vector, ctrl: &ControlSchedule, act: Activation) -> Result<Vector> {
    euler_run(x0, ctrl, act, |_, _| {})
}

fn euler_run(
    x0: &Vector,
    ctrl: &ControlSchedule,
    act: Activation,
    mut visit: impl FnMut(usize, &Vector),
) -> Result<Vector> {
    let d = ctrl.dim();
    if x0.len() != d {
        return Err(Error::Dimension {
            context: "initial state",
            expected: d,
            got: x0.len(),
        });
    }
    if let Some((i, v)) = x0.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite {
            location: format!("entry {i} of the initial state"),
            value: *v,
        });
    }
    let dt = ctrl.dt();
    let mut x = x0.clone();
    let mut pre = Vector::zeros(d);
    let mut step = |k: usize, x: &mut Vector, w: &Matrix, b: &Vector| -> Result<()> {
        pre.copy_from(b);
        pre.gemv(1.0, w, x, 1.0);
        for (xi, p) in x.iter_mut().zip(pre.iter()) {
            *xi += dt * act.apply(*p);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                time: ctrl.time(k + 1),
            });
        }
        Ok(())
    };
    match ctrl.profile() {
        Profile::Constant { weight, bias } => {
            for k in 0..ctrl.steps() {
                step(k, &mut x, weight, bias)?;
                visit(k + 1, &x);
            }
        }
        _ => {
            for k in 0..ctrl.steps() {
                let t = ctrl.time(k);
                step(k, &mut x, &ctrl.weight_at(t), &ctrl.bias_at(t))?;
                visit(k + 1, &x);
            }
        }
    }
    Ok(x)
}
