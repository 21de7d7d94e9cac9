use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate_final, Activation, ControlSchedule};
use crate::{Error, Result, Vector};

/// `M` data points `xᵢ ∈ ℝᵈ` with paired targets `yᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    states: Vec<Vector>,
    targets: Vec<Vector>,
}

impl ParticleEnsemble {
    pub fn new(states: Vec<Vector>, targets: Vec<Vector>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::config("ensemble needs at least one particle"));
        }
        if states.len() != targets.len() {
            return Err(Error::Dimension {
                context: "ensemble targets",
                expected: states.len(),
                got: targets.len(),
            });
        }
        let d = states[0].len();
        if d == 0 {
            return Err(Error::config("state dimension must be at least 1"));
        }
        for (i, v) in states.iter().chain(targets.iter()).enumerate() {
            if v.len() != d {
                return Err(Error::Dimension {
                    context: "ensemble vector",
                    expected: d,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    location: format!("ensemble vector {}", i % states.len()),
                    value: f64::NAN,
                });
            }
        }
        Ok(Self { states, targets })
    }

    /// Scalar particles drawn from `U([lo, hi])`, all sharing `target`.
    pub fn uniform_scalar<R: Rng + ?Sized>(
        m: usize,
        lo: f64,
        hi: f64,
        target: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let states = (0..m)
            .map(|_| Vector::from_element(1, rng.random_range(lo..hi)))
            .collect();
        Self::new(states, vec![Vector::from_element(1, target); m])
    }

    pub fn with_targets(&self, targets: Vec<Vector>) -> Result<Self> {
        Self::new(self.states.clone(), targets)
    }

    pub fn states(&self) -> &[Vector] {
        &self.states
    }

    pub fn targets(&self) -> &[Vector] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }
}

/// Final states of every particle, in particle order. Particles run in parallel;
/// each one follows exactly the arithmetic of a single [`integrate_final`] call.
pub fn integrate_ensemble(
    ens: &ParticleEnsemble,
    ctrl: &ControlSchedule,
    act: Activation,
) -> Result<Vec<Vector>> {
    ens.states()
        .par_iter()
        .enumerate()
        .map(|(index, x0)| {
            integrate_final(x0, ctrl, act).map_err(|e| Error::Particle {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Per-sample distance `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// Euclidean norm `|z|`.
    Abs,
    /// Squared Euclidean norm `|z|²`.
    Square,
}

impl Loss {
    pub fn scalar(self, z: f64) -> f64 {
        match self {
            Loss::Abs => z.abs(),
            Loss::Square => z * z,
        }
    }

    pub fn vector(self, z: &Vector) -> f64 {
        match self {
            Loss::Abs => z.norm(),
            Loss::Square => z.norm_squared(),
        }
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "abs" => Ok(Loss::Abs),
            "square" => Ok(Loss::Square),
            _ => Err(Error::config(format!("unknown loss `{s}`"))),
        }
    }
}

/// `(1/M) Σᵢ ℓ(xᵢ(T) − yᵢ)`.
pub fn loss_micro(finals: &[Vector], targets: &[Vector], ell: Loss) -> Result<f64> {
    if finals.len() != targets.len() {
        return Err(Error::Dimension {
            context: "loss targets",
            expected: finals.len(),
            got: targets.len(),
        });
    }
    if finals.is_empty() {
        return Err(Error::config("loss of an empty ensemble"));
    }
    let mut acc = 0.0;
    for (x, y) in finals.iter().zip(targets) {
        if x.len() != y.len() {
            return Err(Error::Dimension {
                context: "loss vector",
                expected: x.len(),
                got: y.len(),
            });
        }
        acc += ell.vector(&(x - y));
    }
    Ok(acc / finals.len() as f64)
}
