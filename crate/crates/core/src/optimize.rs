//! Projected gradient descent with a constant step over a box of `(w, b)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::surrogate::ParamPoint;
use crate::{Error, Result};

/// `[w_min, w_max] × [b_min, b_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub w_min: f64,
    pub w_max: f64,
    pub b_min: f64,
    pub b_max: f64,
}

impl BoxDomain {
    pub fn new(w_min: f64, w_max: f64, b_min: f64, b_max: f64) -> Result<Self> {
        let finite = [w_min, w_max, b_min, b_max].iter().all(|v| v.is_finite());
        if !(finite && w_min < w_max && b_min < b_max) {
            return Err(Error::config(format!(
                "invalid box [{w_min}, {w_max}] × [{b_min}, {b_max}]"
            )));
        }
        Ok(Self {
            w_min,
            w_max,
            b_min,
            b_max,
        })
    }

    pub fn contains(&self, p: ParamPoint) -> bool {
        (self.w_min..=self.w_max).contains(&p.w) && (self.b_min..=self.b_max).contains(&p.b)
    }

    pub fn corners(&self) -> [ParamPoint; 4] {
        [
            ParamPoint::new(self.w_min, self.b_min),
            ParamPoint::new(self.w_max, self.b_min),
            ParamPoint::new(self.w_min, self.b_max),
            ParamPoint::new(self.w_max, self.b_max),
        ]
    }

    /// The corner farthest from `p` in the box-normalised metric, first in
    /// [`corners`](Self::corners) order on ties.
    pub fn farthest_corner(&self, p: ParamPoint) -> ParamPoint {
        let (sw, sb) = (self.w_max - self.w_min, self.b_max - self.b_min);
        let dist = |c: &ParamPoint| ((c.w - p.w) / sw).powi(2) + ((c.b - p.b) / sb).powi(2);
        let corners = self.corners();
        let mut best = corners[0];
        for c in &corners[1..] {
            if dist(c) > dist(&best) {
                best = *c;
            }
        }
        best
    }
}

/// Component-wise clamp onto the box.
pub fn project(p: ParamPoint, domain: &BoxDomain) -> ParamPoint {
    ParamPoint::new(
        p.w.clamp(domain.w_min, domain.w_max),
        p.b.clamp(domain.b_min, domain.b_max),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgdOptions {
    pub step: f64,
    pub max_iters: usize,
    /// Threshold on the gradient mapping `‖(p − proj(p − step·∇))/step‖`, which
    /// equals `‖∇‖` at interior points and vanishes at constrained stationary points.
    pub grad_tol: f64,
    /// Threshold on `‖p_{k+1} − p_k‖`; zero disables the test.
    pub step_tol: f64,
}

impl Default for PgdOptions {
    fn default() -> Self {
        Self {
            step: 1e-5,
            max_iters: 100_000,
            grad_tol: 1e-8,
            step_tol: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    SmallStep,
    SmallGrad,
}

/// Every iterate with its objective value, starting with the initial point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentTrace {
    pub iterates: Vec<(ParamPoint, f64)>,
    pub step_size: f64,
    pub stop_reason: StopReason,
    pub options: PgdOptions,
}

impl DescentTrace {
    pub fn last(&self) -> (ParamPoint, f64) {
        *self.iterates.last().expect("trace holds the start point")
    }

    /// Number of updates performed.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    /// Writes `iter,w,b,objective` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,w,b,objective")?;
        for (k, (p, f)) in self.iterates.iter().enumerate() {
            writeln!(out, "{k},{:.16e},{:.16e},{:.16e}", p.w, p.b, f)?;
        }
        Ok(())
    }
}

/// Iterates `p ← proj(p − step·∇f(p))` from `start`.
pub fn pgd<F, G>(
    objective: F,
    gradient: G,
    start: ParamPoint,
    domain: &BoxDomain,
    options: PgdOptions,
) -> Result<DescentTrace>
where
    F: Fn(ParamPoint) -> f64,
    G: Fn(ParamPoint) -> [f64; 2],
{
    if !(options.step > 0.0 && options.step.is_finite()) {
        return Err(Error::config(format!(
            "descent step must be positive, got {}",
            options.step
        )));
    }
    if !domain.contains(start) {
        return Err(Error::config(format!(
            "start ({}, {}) lies outside the box",
            start.w, start.b
        )));
    }
    let value = |p: ParamPoint, k: usize| {
        let f = objective(p);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::NonFinite {
                location: format!("objective at iterate {k}"),
                value: f,
            })
        }
    };
    let mut p = start;
    let mut iterates = vec![(p, value(p, 0)?)];
    let mut stop_reason = StopReason::MaxIters;
    for k in 0..options.max_iters {
        let g = gradient(p);
        if !(g[0].is_finite() && g[1].is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: k });
        }
        let q = project(
            ParamPoint::new(p.w - options.step * g[0], p.b - options.step * g[1]),
            domain,
        );
        let (dw, db) = (q.w - p.w, q.b - p.b);
        let moved = dw.hypot(db);
        if moved / options.step <= options.grad_tol {
            stop_reason = StopReason::SmallGrad;
            break;
        }
        p = q;
        iterates.push((p, value(p, k + 1)?));
        if options.step_tol > 0.0 && moved <= options.step_tol {
            stop_reason = StopReason::SmallStep;
            break;
        }
    }
    Ok(DescentTrace {
        iterates,
        step_size: options.step,
        stop_reason,
        options,
    })
}
