use serde::Serialize;

use super::config::{DecayConfig, ExperimentConfig};
use super::output::{svg_lines, CsvTable, Manifest, ManifestNotes, OutputDir};
use crate::controllability::{static_control, ClosedFormFlow, FlowCase, StaticControl};
use crate::dynamics::{integrate_ode, Activation, ControlSchedule};
use crate::{Result, Vector};

#[derive(Clone, Debug, Serialize)]
pub struct DecayCurveResult {
    pub label: String,
    pub case: FlowCase,
    pub alpha: f64,
    pub control: StaticControl,
    /// Explicit-Euler flow on the schedule grid.
    pub euler: Vec<f64>,
    /// Closed-form flow at the same times.
    pub closed_form: Vec<f64>,
    pub terminal_error: f64,
    /// First grid time with `|Φ − y| ≤ threshold`.
    pub crossing_time: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayOutcome {
    pub times: Vec<f64>,
    pub curves: Vec<DecayCurveResult>,
}

pub fn compute_decay(cfg: &DecayConfig) -> Result<DecayOutcome> {
    let mut times = Vec::new();
    let mut curves = Vec::with_capacity(cfg.curves.len());
    for curve in &cfg.curves {
        let schedule = match curve.case {
            FlowCase::Power => {
                ControlSchedule::power(cfg.omega, curve.alpha, 0.0, cfg.t0, cfg.t_end, cfg.dt)?
            }
            FlowCase::Exp => {
                ControlSchedule::exp(cfg.omega, curve.alpha, 0.0, cfg.t0, cfg.t_end, cfg.dt)?
            }
        };
        let control = static_control(cfg.x0, cfg.y, &schedule)?;
        let controlled = schedule.with_scalar_bias(control.bias);
        let traj = integrate_ode(
            &Vector::from_element(1, cfg.x0),
            &controlled,
            Activation::Identity,
        )?;
        let euler = traj.scalar_path();
        let flow = ClosedFormFlow::new(curve.case, cfg.omega, curve.alpha, cfg.t0)
            .with_panels(cfg.closed_form_panels);
        let closed_form = traj
            .times
            .iter()
            .map(|&t| flow.eval(control.bias, cfg.x0, t))
            .collect();
        let crossing_time = traj
            .times
            .iter()
            .zip(&euler)
            .find(|(_, x)| (**x - cfg.y).abs() <= cfg.threshold)
            .map(|(t, _)| *t);
        let terminal_error = (euler.last().copied().unwrap_or(cfg.x0) - cfg.y).abs();
        times = traj.times.clone();
        curves.push(DecayCurveResult {
            label: curve.label.clone(),
            case: curve.case,
            alpha: curve.alpha,
            control,
            euler,
            closed_form,
            terminal_error,
            crossing_time,
        });
    }
    Ok(DecayOutcome { times, curves })
}

/// Static-control decay curves: `decay.csv`, `decay_closed_form.csv`, `decay.svg`.
pub fn run_decay(cfg: &ExperimentConfig) -> Result<(DecayOutcome, Manifest)> {
    let started = std::time::Instant::now();
    let outcome = compute_decay(&cfg.decay)?;
    let mut out = OutputDir::create(&cfg.output_dir.join("decay"))?;

    let mut header = vec!["t".to_string()];
    header.extend(outcome.curves.iter().map(|c| format!("phi_{}", c.label)));
    let mut euler = CsvTable::new(&header);
    let mut exact = CsvTable::new(&header);
    for (k, t) in outcome.times.iter().enumerate() {
        let mut row = vec![*t];
        row.extend(outcome.curves.iter().map(|c| c.euler[k]));
        euler.push(&row);
        let mut row = vec![*t];
        row.extend(outcome.curves.iter().map(|c| c.closed_form[k]));
        exact.push(&row);
    }
    out.write_csv("decay.csv", &euler)?;
    out.write_csv("decay_closed_form.csv", &exact)?;
    let series: Vec<(&str, &[f64], &[f64])> = outcome
        .curves
        .iter()
        .map(|c| {
            (
                c.label.as_str(),
                outcome.times.as_slice(),
                c.euler.as_slice(),
            )
        })
        .collect();
    out.write(
        "decay.svg",
        &svg_lines("Static control decay", "t", "Phi(t)", &series),
    )?;

    let mut notes = ManifestNotes::default();
    for c in &outcome.curves {
        notes.metric(&format!("{}.bias", c.label), c.control.bias);
        notes.metric(&format!("{}.terminal_error", c.label), c.terminal_error);
        notes.metric(&format!("{}.crossing_time", c.label), c.crossing_time);
    }
    notes.assume(
        "omega",
        format!("{} shared by every curve", cfg.decay.omega),
    );
    notes.assume(
        "curves",
        "a: w = omega t^0, b: w = omega t^4, c: w = omega e^(4t)",
    );
    let manifest = out.finish("decay", cfg.seed, &cfg.decay, notes, started)?;
    Ok((outcome, manifest))
}
