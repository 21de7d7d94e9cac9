use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result, Vector};

/// Time profile of the weights `w(t)` and bias `b(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Constant {
        weight: Matrix,
        bias: Vector,
    },
    /// Piece `k` is active on `[starts[k], starts[k+1])`; the last piece extends to the horizon.
    PiecewiseConstant {
        starts: Vec<f64>,
        weights: Vec<Matrix>,
        biases: Vec<Vector>,
    },
    /// Scalar `w(t) = ω t^α` with constant scalar bias.
    Power {
        omega: f64,
        alpha: f64,
        bias: f64,
    },
    /// Scalar `w(t) = ω e^{α t}` with constant scalar bias.
    Exp {
        omega: f64,
        alpha: f64,
        bias: f64,
    },
}

impl Profile {
    fn dim(&self) -> usize {
        match self {
            Profile::Constant { bias, .. } => bias.len(),
            Profile::PiecewiseConstant { biases, .. } => biases[0].len(),
            Profile::Power { .. } | Profile::Exp { .. } => 1,
        }
    }
}

/// Controls `(w, b)` over a uniform time grid `t0, t0 + dt, …, T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    profile: Profile,
    t0: f64,
    t_end: f64,
    dt: f64,
    steps: usize,
}

const GRID_TOL: f64 = 1e-12;

impl ControlSchedule {
    /// A zero-length horizon (`t_end == t0`) is allowed and has a single grid point.
    pub fn new(profile: Profile, t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && dt.is_finite()) {
            return Err(Error::config("schedule times must be finite"));
        }
        if dt <= 0.0 {
            return Err(Error::config(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if t_end < t0 {
            return Err(Error::config(format!(
                "horizon end {t_end} precedes start {t0}"
            )));
        }
        let span = t_end - t0;
        let steps = (span / dt).round();
        if (steps * dt - span).abs() > GRID_TOL * span.max(1.0) {
            return Err(Error::config(format!(
                "time step {dt} does not divide the horizon [{t0}, {t_end}]"
            )));
        }
        validate_profile(&profile, t0)?;
        Ok(Self {
            profile,
            t0,
            t_end,
            dt,
            steps: steps as usize,
        })
    }

    pub fn constant(weight: Matrix, bias: Vector, t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        Self::new(Profile::Constant { weight, bias }, t0, t_end, dt)
    }

    /// Scalar (`d = 1`) constant controls.
    pub fn scalar(w: f64, b: f64, t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        Self::constant(
            Matrix::from_element(1, 1, w),
            Vector::from_element(1, b),
            t0,
            t_end,
            dt,
        )
    }

    pub fn power(omega: f64, alpha: f64, bias: f64, t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        Self::new(Profile::Power { omega, alpha, bias }, t0, t_end, dt)
    }

    pub fn exp(omega: f64, alpha: f64, bias: f64, t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        Self::new(Profile::Exp { omega, alpha, bias }, t0, t_end, dt)
    }

    /// Same weights and horizon with a different time step.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::new(self.profile.clone(), self.t0, self.t_end, dt)
    }

    /// Same weights and grid with the scalar bias replaced (`d = 1` profiles only
    /// for power/exp; constant profiles take the value on every component).
    pub fn with_scalar_bias(&self, b: f64) -> Self {
        let profile = match &self.profile {
            Profile::Constant { weight, bias } => Profile::Constant {
                weight: weight.clone(),
                bias: Vector::from_element(bias.len(), b),
            },
            Profile::PiecewiseConstant {
                starts,
                weights,
                biases,
            } => Profile::PiecewiseConstant {
                starts: starts.clone(),
                weights: weights.clone(),
                biases: biases
                    .iter()
                    .map(|v| Vector::from_element(v.len(), b))
                    .collect(),
            },
            Profile::Power { omega, alpha, .. } => Profile::Power {
                omega: *omega,
                alpha: *alpha,
                bias: b,
            },
            Profile::Exp { omega, alpha, .. } => Profile::Exp {
                omega: *omega,
                alpha: *alpha,
                bias: b,
            },
        };
        Self {
            profile,
            ..self.clone()
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.profile.dim()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of Euler steps; the grid has `steps() + 1` points.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Grid time `k`. The last point is pinned to `t_end`.
    pub fn time(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.t_end
        } else {
            self.t0 + k as f64 * self.dt
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    pub fn weight_at(&self, t: f64) -> Matrix {
        match &self.profile {
            Profile::Constant { weight, .. } => weight.clone(),
            Profile::PiecewiseConstant {
                starts, weights, ..
            } => weights[piece_index(starts, t)].clone(),
            Profile::Power { .. } | Profile::Exp { .. } => {
                Matrix::from_element(1, 1, self.scalar_weight_at(t).unwrap_or(f64::NAN))
            }
        }
    }

    pub fn bias_at(&self, t: f64) -> Vector {
        match &self.profile {
            Profile::Constant { bias, .. } => bias.clone(),
            Profile::PiecewiseConstant { starts, biases, .. } => {
                biases[piece_index(starts, t)].clone()
            }
            Profile::Power { bias, .. } | Profile::Exp { bias, .. } => {
                Vector::from_element(1, *bias)
            }
        }
    }

    /// `w(t)` for scalar schedules, `None` when `d > 1`.
    pub fn scalar_weight_at(&self, t: f64) -> Option<f64> {
        match &self.profile {
            Profile::Power { omega, alpha, .. } => Some(omega * t.powf(*alpha)),
            Profile::Exp { omega, alpha, .. } => Some(omega * (alpha * t).exp()),
            _ if self.dim() == 1 => Some(self.weight_at(t)[(0, 0)]),
            _ => None,
        }
    }

    pub fn scalar_bias_at(&self, t: f64) -> Option<f64> {
        (self.dim() == 1).then(|| self.bias_at(t)[0])
    }

    /// `∫_{t0}^{t} w(s) ds` in closed form for scalar schedules.
    pub fn weight_integral(&self, t: f64) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::Dimension {
                context: "weight integral (scalar schedules only)",
                expected: 1,
                got: self.dim(),
            });
        }
        self.check_in_horizon(t)?;
        Ok(match &self.profile {
            Profile::Constant { weight, .. } => weight[(0, 0)] * (t - self.t0),
            Profile::PiecewiseConstant {
                starts, weights, ..
            } => {
                let mut acc = 0.0;
                for (k, w) in weights.iter().enumerate() {
                    let lo = starts[k].max(self.t0);
                    let hi = starts.get(k + 1).copied().unwrap_or(f64::INFINITY).min(t);
                    if hi > lo {
                        acc += w[(0, 0)] * (hi - lo);
                    }
                }
                acc
            }
            Profile::Power { omega, alpha, .. } => {
                power_antiderivative(*omega, *alpha, t)
                    - power_antiderivative(*omega, *alpha, self.t0)
            }
            Profile::Exp { omega, alpha, .. } => {
                exp_antiderivative(*omega, *alpha, t) - exp_antiderivative(*omega, *alpha, self.t0)
            }
        })
    }

    pub(crate) fn check_in_horizon(&self, t: f64) -> Result<()> {
        let slack = GRID_TOL * (self.t_end - self.t0).abs().max(1.0);
        if t < self.t0 - slack || t > self.t_end + slack || t.is_nan() {
            return Err(Error::OutOfHorizon {
                time: t,
                t0: self.t0,
                t_end: self.t_end,
            });
        }
        Ok(())
    }
}

/// Antiderivative of `ω s^α`.
pub(crate) fn power_antiderivative(omega: f64, alpha: f64, t: f64) -> f64 {
    omega * t.powf(alpha + 1.0) / (alpha + 1.0)
}

/// Antiderivative of `ω e^{α s}`; reduces to `ω s` for `α = 0`.
pub(crate) fn exp_antiderivative(omega: f64, alpha: f64, t: f64) -> f64 {
    if alpha == 0.0 {
        omega * t
    } else {
        omega * (alpha * t).exp() / alpha
    }
}

fn piece_index(starts: &[f64], t: f64) -> usize {
    // left-closed intervals: the piece whose start is the last one <= t
    starts.partition_point(|&s| s <= t).saturating_sub(1)
}

fn validate_profile(profile: &Profile, t0: f64) -> Result<()> {
    let check_pair = |w: &Matrix, b: &Vector| -> Result<()> {
        if w.nrows() != b.len() || w.ncols() != b.len() {
            return Err(Error::Dimension {
                context: "weight matrix must be d×d with d = bias length",
                expected: b.len(),
                got: w.nrows().max(w.ncols()),
            });
        }
        if b.is_empty() {
            return Err(Error::config("state dimension must be at least 1"));
        }
        if w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::config("controls must be finite"));
        }
        Ok(())
    };
    match profile {
        Profile::Constant { weight, bias } => check_pair(weight, bias),
        Profile::PiecewiseConstant {
            starts,
            weights,
            biases,
        } => {
            if starts.is_empty() || starts.len() != weights.len() || starts.len() != biases.len() {
                return Err(Error::config(
                    "piecewise schedule needs matching, non-empty starts/weights/biases",
                ));
            }
            if (starts[0] - t0).abs() > GRID_TOL * t0.abs().max(1.0) {
                return Err(Error::config("first piece must start at t0"));
            }
            if starts.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::config("piece starts must be strictly increasing"));
            }
            let d = biases[0].len();
            for (w, b) in weights.iter().zip(biases) {
                if b.len() != d {
                    return Err(Error::Dimension {
                        context: "piecewise bias",
                        expected: d,
                        got: b.len(),
                    });
                }
                check_pair(w, b)?;
            }
            Ok(())
        }
        Profile::Power { omega, alpha, bias } => {
            if !(omega.is_finite() && alpha.is_finite() && bias.is_finite()) || *alpha < 0.0 {
                return Err(Error::config("power profile needs finite ω, b and α ≥ 0"));
            }
            Ok(())
        }
        Profile::Exp { omega, alpha, bias } => {
            if !(omega.is_finite() && alpha.is_finite() && bias.is_finite()) {
                return Err(Error::config("exponential profile needs finite ω, α, b"));
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_must_divide_horizon() {
        assert!(ControlSchedule::scalar(0.0, 0.0, 0.0, 10.0, 1e-2).is_ok());
        assert!(ControlSchedule::scalar(0.0, 0.0, 0.0, 1.0, 0.3).is_err());
        assert!(ControlSchedule::scalar(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(ControlSchedule::scalar(0.0, 0.0, 1.0, 0.0, 0.1).is_err());
        let s = ControlSchedule::scalar(0.0, 0.0, 0.0, 10.0, 1e-2).unwrap();
        assert_eq!(s.steps(), 1000);
        assert_eq!(s.time(0), 0.0);
        assert_eq!(s.time(1000), 10.0);
    }

    #[test]
    fn zero_length_horizon_has_one_point() {
        let s = ControlSchedule::scalar(1.0, 0.0, 2.0, 2.0, 0.1).unwrap();
        assert_eq!(s.steps(), 0);
        assert_eq!(s.times(), vec![2.0]);
    }

    #[test]
    fn piecewise_is_left_closed() {
        let m = |v: f64| Matrix::from_element(1, 1, v);
        let v = |v: f64| Vector::from_element(1, v);
        let s = ControlSchedule::new(
            Profile::PiecewiseConstant {
                starts: vec![0.0, 0.5],
                weights: vec![m(1.0), m(2.0)],
                biases: vec![v(-1.0), v(-2.0)],
            },
            0.0,
            1.0,
            0.1,
        )
        .unwrap();
        assert_eq!(s.scalar_weight_at(0.0), Some(1.0));
        assert_eq!(s.scalar_weight_at(0.49), Some(1.0));
        assert_eq!(s.scalar_weight_at(0.5), Some(2.0));
        assert_eq!(s.scalar_bias_at(1.0), Some(-2.0));
        assert!((s.weight_integral(1.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((s.weight_integral(0.25).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn closed_form_weight_integrals() {
        let s = ControlSchedule::power(-3.0, 4.0, 0.0, 0.0, 1.0, 0.01).unwrap();
        assert!((s.weight_integral(1.0).unwrap() + 0.6).abs() < 1e-15);
        let s = ControlSchedule::exp(-3.0, 4.0, 0.0, 0.0, 1.0, 0.01).unwrap();
        let expected = -3.0 * (4.0f64.exp() - 1.0) / 4.0;
        assert!((s.weight_integral(1.0).unwrap() - expected).abs() < 1e-12);
        let s = ControlSchedule::exp(-3.0, 0.0, 0.0, 0.0, 1.0, 0.01).unwrap();
        assert_eq!(s.weight_integral(1.0).unwrap(), -3.0);
        assert!(s.weight_integral(1.5).is_err());
    }

    #[test]
    fn power_profile_with_zero_exponent_is_constant() {
        let s = ControlSchedule::power(-3.0, 0.0, 0.0, 0.0, 1.0, 0.01).unwrap();
        assert_eq!(s.scalar_weight_at(0.0), Some(-3.0));
        assert_eq!(s.scalar_weight_at(0.7), Some(-3.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        let r = ControlSchedule::constant(Matrix::zeros(2, 3), Vector::zeros(2), 0.0, 1.0, 0.1);
        assert!(matches!(r, Err(Error::Dimension { .. })));
        assert!(ControlSchedule::power(1.0, -1.0, 0.0, 0.0, 1.0, 0.1).is_err());
    }
}
