use super::static_control::c1_c2;
use crate::dynamics::ControlSchedule;
use crate::{Error, Result, Vector};

/// Point of the extended flow: the evolving state `x1` with the frozen initial
/// datum `x2` and target `x3` carried alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedState {
    pub x1: Vector,
    pub x2: Vector,
    pub x3: Vector,
}

/// Euler integration of `x1' = w(t)x1 + b(t, x2, x3)`, `x2' = 0`, `x3' = 0`
/// started from `(x, x, y)`. The schedule supplies `w(t)` only; its bias is
/// ignored in favour of `bias_fn`. `x2` and `x3` are copied, never updated.
pub fn integrate_extended<F>(
    x: &Vector,
    y: &Vector,
    schedule: &ControlSchedule,
    bias_fn: F,
) -> Result<Vec<ExtendedState>>
where
    F: Fn(f64, &Vector, &Vector) -> Vector,
{
    let d = schedule.dim();
    for (v, context) in [(x, "extended initial state"), (y, "extended target")] {
        if v.len() != d {
            return Err(Error::Dimension {
                context,
                expected: d,
                got: v.len(),
            });
        }
    }
    let dt = schedule.dt();
    let mut path = Vec::with_capacity(schedule.steps() + 1);
    path.push(ExtendedState {
        x1: x.clone(),
        x2: x.clone(),
        x3: y.clone(),
    });
    for k in 0..schedule.steps() {
        let t = schedule.time(k);
        let cur = &path[k];
        let b = bias_fn(t, &cur.x2, &cur.x3);
        if b.len() != d {
            return Err(Error::Dimension {
                context: "extended bias",
                expected: d,
                got: b.len(),
            });
        }
        let w = schedule.weight_at(t);
        let mut x1 = cur.x1.clone();
        x1.gemv(dt, &w, &cur.x1, 1.0);
        x1.axpy(dt, &b, 1.0);
        if x1.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                time: schedule.time(k + 1),
            });
        }
        path.push(ExtendedState {
            x1,
            x2: cur.x2.clone(),
            x3: cur.x3.clone(),
        });
    }
    Ok(path)
}

/// State-dependent static control `b(x2, x3) = (x3 − x2·c1(T)) / (c1(T)c2(T))`,
/// applied component-wise, for use as the `bias_fn` of [`integrate_extended`].
/// Only scalar weight schedules are supported.
pub fn static_feedback(
    schedule: &ControlSchedule,
) -> Result<impl Fn(f64, &Vector, &Vector) -> Vector> {
    let c = c1_c2(schedule, schedule.t_end())?;
    let denom = c.c1 * c.c2;
    if !(denom.abs() >= super::static_control::MIN_C1C2) {
        return Err(Error::DegenerateHorizon(denom));
    }
    let c1 = c.c1;
    Ok(move |_t: f64, x2: &Vector, x3: &Vector| (x3 - x2 * c1) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> Vector {
        Vector::from_element(1, v)
    }

    #[test]
    fn frozen_coordinates_are_exact() {
        let sched = ControlSchedule::scalar(0.9, 0.0, 0.0, 1.0, 0.01).unwrap();
        let path = integrate_extended(&s(0.3), &s(-1.1), &sched, |t, x2, x3| x2 * t + x3).unwrap();
        assert_eq!(path.len(), 101);
        assert!(path.iter().all(|p| p.x2 == s(0.3) && p.x3 == s(-1.1)));
    }

    #[test]
    fn zero_field_keeps_state() {
        let sched = ControlSchedule::scalar(0.0, 0.0, 0.0, 1.0, 0.01).unwrap();
        let path = integrate_extended(&s(2.0), &s(0.0), &sched, |_, _, _| s(0.0)).unwrap();
        assert!(path.iter().all(|p| p.x1 == s(2.0)));
    }

    #[test]
    fn static_feedback_reaches_target() {
        let sched = ControlSchedule::scalar(0.0, 0.0, 0.0, 1.0, 0.01).unwrap();
        let fb = static_feedback(&sched).unwrap();
        let path = integrate_extended(&s(2.0), &s(0.0), &sched, fb).unwrap();
        assert!(path.last().unwrap().x1[0].abs() < 1e-12);

        let sched = ControlSchedule::scalar(-1.0, 0.0, 0.0, 1.0, 1e-3).unwrap();
        let fb = static_feedback(&sched).unwrap();
        let path = integrate_extended(&s(2.0), &s(0.5), &sched, fb).unwrap();
        assert!((path.last().unwrap().x1[0] - 0.5).abs() < 5e-3);
    }
}
