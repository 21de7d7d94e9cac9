use rand::Rng;
use serde::Serialize;

use super::config::{ExperimentConfig, StaticControlConfig};
use super::output::{svg_lines, CsvTable, Manifest, ManifestNotes, OutputDir};
use super::rng::{stream_rng, Stream};
use crate::controllability::{integrate_extended, static_control, static_feedback, FlowCase};
use crate::dynamics::ControlSchedule;
use crate::{Result, Vector};

#[derive(Clone, Debug, Serialize)]
pub struct StaticParticle {
    pub x0: f64,
    pub y: f64,
    pub bias: f64,
    pub path: Vec<f64>,
    pub terminal_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StaticControlOutcome {
    pub times: Vec<f64>,
    pub particles: Vec<StaticParticle>,
    pub max_terminal_error: f64,
}

/// Each particle carries its own initial datum and target in the frozen
/// coordinates of the extended flow; the static feedback turns them into a
/// per-particle bias.
pub fn compute_static_control(
    cfg: &StaticControlConfig,
    seed: u64,
) -> Result<StaticControlOutcome> {
    let schedule = match cfg.case {
        FlowCase::Power => {
            ControlSchedule::power(cfg.omega, cfg.alpha, 0.0, cfg.t0, cfg.t_end, cfg.dt)?
        }
        FlowCase::Exp => {
            ControlSchedule::exp(cfg.omega, cfg.alpha, 0.0, cfg.t0, cfg.t_end, cfg.dt)?
        }
    };
    let feedback = static_feedback(&schedule)?;
    let mut rng = stream_rng(seed, Stream::StaticControlData);
    let mut particles = Vec::with_capacity(cfg.particles);
    for _ in 0..cfg.particles {
        let x0 = rng.random_range(cfg.x0_min..=cfg.x0_max);
        let y = rng.random_range(cfg.y_min..=cfg.y_max);
        let ext = integrate_extended(
            &Vector::from_element(1, x0),
            &Vector::from_element(1, y),
            &schedule,
            &feedback,
        )?;
        let path: Vec<f64> = ext.iter().map(|s| s.x1[0]).collect();
        let terminal_error = (path.last().expect("non-empty") - y).abs();
        particles.push(StaticParticle {
            x0,
            y,
            bias: static_control(x0, y, &schedule)?.bias,
            path,
            terminal_error,
        });
    }
    let max_terminal_error = particles
        .iter()
        .map(|p| p.terminal_error)
        .fold(0.0, f64::max);
    Ok(StaticControlOutcome {
        times: schedule.times(),
        particles,
        max_terminal_error,
    })
}

/// Extended-flow demonstration: `static_control.csv` and `particles.csv`.
pub fn run_static_control(cfg: &ExperimentConfig) -> Result<(StaticControlOutcome, Manifest)> {
    let started = std::time::Instant::now();
    let o = compute_static_control(&cfg.static_control, cfg.seed)?;
    let mut out = OutputDir::create(&cfg.output_dir.join("static_control"))?;
    let mut header = vec!["t".to_string()];
    header.extend((0..o.particles.len()).map(|i| format!("x1_{i}")));
    let mut t = CsvTable::new(&header);
    for k in 0..o.times.len() {
        let mut row = vec![o.times[k]];
        row.extend(o.particles.iter().map(|p| p.path[k]));
        t.push(&row);
    }
    out.write_csv("static_control.csv", &t)?;
    let mut p = CsvTable::new(&["x0", "y", "bias", "final", "terminal_error"]);
    for q in &o.particles {
        p.push(&[
            q.x0,
            q.y,
            q.bias,
            *q.path.last().expect("non-empty"),
            q.terminal_error,
        ]);
    }
    out.write_csv("particles.csv", &p)?;
    let labels: Vec<String> = (0..o.particles.len())
        .map(|i| format!("particle {i}"))
        .collect();
    let series: Vec<(&str, &[f64], &[f64])> = o
        .particles
        .iter()
        .zip(&labels)
        .map(|(q, l)| (l.as_str(), o.times.as_slice(), q.path.as_slice()))
        .collect();
    out.write(
        "static_control.svg",
        &svg_lines("Extended flow with static feedback", "t", "x1(t)", &series),
    )?;
    let mut notes = ManifestNotes::default();
    notes.metric("max_terminal_error", o.max_terminal_error);
    notes.assume("initial_and_targets", "uniform draws on stream 6");
    let manifest = out.finish(
        "static_control",
        cfg.seed,
        &cfg.static_control,
        notes,
        started,
    )?;
    Ok((o, manifest))
}
