//! Configuration-driven experiment runners. Each runner computes its results,
//! writes CSV (the ground truth), SVG previews and a `manifest.json` with
//! checksums into `<output_dir>/<experiment>/`, and returns the results.

pub mod config;
pub mod output;
pub mod rng;

mod common;
mod consistency;
mod decay;
mod hum;
mod meanfield;
mod micro;
mod static_demo;

use std::fmt;
use std::str::FromStr;

pub use common::DescentOutcome;
pub use config::ExperimentConfig;
pub use consistency::{compute_consistency, run_consistency, ConsistencyOutcome, ConsistencyRow};
pub use decay::{compute_decay, run_decay, DecayCurveResult, DecayOutcome};
pub use hum::{compute_hum, run_hum, HumOutcome};
pub use meanfield::{
    compute_mf_descent, compute_mf_surface, run_mf_descent, run_mf_surface,
    MeanFieldDescentOutcome, MeanFieldProblem, MeanFieldSurfaceOutcome,
};
pub use micro::{
    compute_micro_descent, compute_micro_surface, run_micro_descent, run_micro_surface,
    MicroDescentOutcome, MicroProblem, SurfaceOutcome,
};
pub use output::Manifest;
pub use static_demo::{
    compute_static_control, run_static_control, StaticControlOutcome, StaticParticle,
};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Decay,
    MicroSurface,
    MicroDescent,
    MfSurface,
    MfDescent,
    Hum,
    StaticControl,
    Consistency,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Decay,
        Experiment::MicroSurface,
        Experiment::MicroDescent,
        Experiment::MfSurface,
        Experiment::MfDescent,
        Experiment::Hum,
        Experiment::StaticControl,
        Experiment::Consistency,
    ];

    /// Command name, also the output subdirectory with `-` replaced by `_`.
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Decay => "decay",
            Experiment::MicroSurface => "micro-surface",
            Experiment::MicroDescent => "micro-descent",
            Experiment::MfSurface => "mf-surface",
            Experiment::MfDescent => "mf-descent",
            Experiment::Hum => "hum",
            Experiment::StaticControl => "static-control",
            Experiment::Consistency => "consistency",
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<Manifest> {
        Ok(match self {
            Experiment::Decay => run_decay(cfg)?.1,
            Experiment::MicroSurface => run_micro_surface(cfg)?.1,
            Experiment::MicroDescent => run_micro_descent(cfg)?.1,
            Experiment::MfSurface => run_mf_surface(cfg)?.1,
            Experiment::MfDescent => run_mf_descent(cfg)?.1,
            Experiment::Hum => run_hum(cfg)?.1,
            Experiment::StaticControl => run_static_control(cfg)?.1,
            Experiment::Consistency => run_consistency(cfg)?.1,
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('_', "-");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| Error::config(format!("unknown experiment `{s}`")))
    }
}
