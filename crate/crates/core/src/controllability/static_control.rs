use serde::{Deserialize, Serialize};

use crate::dynamics::ControlSchedule;
use crate::dynamics::{exp_antiderivative, power_antiderivative};
use crate::{Error, Result};

/// Smallest `|c1(T)·c2(T)|` accepted by [`static_control`].
pub const MIN_C1C2: f64 = 1e-14;

/// `c1(t) = exp(∫_{t0}^t w)` and `c2(t) = ∫_{t0}^t exp(-∫_{t0}^s w) ds`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoefficientPair {
    pub c1: f64,
    pub c2: f64,
}

/// Scalar schedules only. The inner integral is closed form; the outer one uses
/// the composite trapezoid rule with panels no wider than the schedule step.
pub fn c1_c2(schedule: &ControlSchedule, t: f64) -> Result<CoefficientPair> {
    schedule.check_in_horizon(t)?;
    let t = t.clamp(schedule.t0(), schedule.t_end());
    let c1 = schedule.weight_integral(t)?.exp();
    let span = t - schedule.t0();
    if span == 0.0 {
        return Ok(CoefficientPair { c1, c2: 0.0 });
    }
    let panels = ((span / schedule.dt()) - 1e-9).ceil().max(1.0) as usize;
    let h = span / panels as f64;
    let f = |s: f64| -> Result<f64> { Ok((-schedule.weight_integral(s)?).exp()) };
    let mut acc = 0.5 * (f(schedule.t0())? + f(t)?);
    for j in 1..panels {
        acc += f(schedule.t0() + j as f64 * h)?;
    }
    Ok(CoefficientPair { c1, c2: h * acc })
}

/// Time-constant bias steering `x0` to `y` under `Φ' = w(t)Φ + b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StaticControl {
    pub bias: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `b = (y − x0·c1(T)) / (c1(T)·c2(T))`.
pub fn static_control(x0: f64, y: f64, schedule: &ControlSchedule) -> Result<StaticControl> {
    let CoefficientPair { c1, c2 } = c1_c2(schedule, schedule.t_end())?;
    let denom = c1 * c2;
    if !(denom.abs() >= MIN_C1C2) {
        return Err(Error::DegenerateHorizon(denom));
    }
    Ok(StaticControl {
        bias: (y - x0 * c1) / denom,
        c1,
        c2,
    })
}

/// Weight family of the closed-form scalar flows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowCase {
    /// `w(t) = ω t^α`.
    Power,
    /// `w(t) = ω e^{α t}`.
    Exp,
}

/// Closed-form solution of `Φ' = w(t)Φ + b`, `Φ(t0) = x0` for the two weight families.
///
/// `Φ(t) = x0·e^{W(t)−W(t0)} + b·∫_{t0}^t e^{W(t)−W(s)} ds` with `W` the
/// antiderivative of `w`. The remaining integral has no elementary form for
/// general `α` and is evaluated by composite Simpson; `panels` is the
/// refinement switch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormFlow {
    pub case: FlowCase,
    pub omega: f64,
    pub alpha: f64,
    pub t0: f64,
    pub panels: usize,
}

impl ClosedFormFlow {
    pub const DEFAULT_PANELS: usize = 2048;

    pub fn new(case: FlowCase, omega: f64, alpha: f64, t0: f64) -> Self {
        Self {
            case,
            omega,
            alpha,
            t0,
            panels: Self::DEFAULT_PANELS,
        }
    }

    /// Rounded up to the next even count.
    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = (panels.max(2) + 1) & !1;
        self
    }

    fn antiderivative(&self, s: f64) -> f64 {
        match self.case {
            FlowCase::Power => power_antiderivative(self.omega, self.alpha, s),
            FlowCase::Exp => exp_antiderivative(self.omega, self.alpha, s),
        }
    }

    pub fn eval(&self, bias: f64, x0: f64, t: f64) -> f64 {
        let wt = self.antiderivative(t);
        let homogeneous = x0 * (wt - self.antiderivative(self.t0)).exp();
        if t == self.t0 || bias == 0.0 {
            return homogeneous;
        }
        let n = self.panels;
        let h = (t - self.t0) / n as f64;
        let f = |s: f64| (wt - self.antiderivative(s)).exp();
        let mut acc = f(self.t0) + f(t);
        for j in 1..n {
            let weight = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += weight * f(self.t0 + j as f64 * h);
        }
        homogeneous + bias * acc * h / 3.0
    }
}

/// One-shot evaluation of [`ClosedFormFlow`] with the default panel count.
pub fn closed_form_flow(
    case: FlowCase,
    omega: f64,
    alpha: f64,
    bias: f64,
    x0: f64,
    t0: f64,
    t: f64,
) -> f64 {
    ClosedFormFlow::new(case, omega, alpha, t0).eval(bias, x0, t)
}
