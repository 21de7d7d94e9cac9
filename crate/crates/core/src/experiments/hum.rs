use serde::Serialize;

use super::config::{ExperimentConfig, HumConfig};
use super::output::{CsvTable, Manifest, ManifestNotes, OutputDir};
use crate::controllability::{duality_pairing, forward_linear, hum_solve_terminal, DualityPairing};
use crate::dynamics::ControlSchedule;
use crate::{Error, Matrix, Result, Vector};

#[derive(Clone, Debug, Serialize)]
pub struct HumOutcome {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub costates: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
    pub terminal_error: f64,
    pub gramian_condition: f64,
    #[serde(skip)]
    pub pairing: DualityPairing,
    pub relative_duality_gap: f64,
}

pub(crate) fn hum_schedule(cfg: &HumConfig) -> Result<ControlSchedule> {
    let d = cfg.weight.len();
    if d == 0 || cfg.weight.iter().any(|row| row.len() != d) {
        return Err(Error::config(
            "hum.weight must be a non-empty square matrix",
        ));
    }
    let w = Matrix::from_fn(d, d, |i, j| cfg.weight[i][j]);
    ControlSchedule::constant(w, Vector::zeros(d), cfg.t0, cfg.t_end, cfg.dt)
}

pub fn compute_hum(cfg: &HumConfig) -> Result<HumOutcome> {
    let schedule = hum_schedule(cfg)?;
    let x0 = Vector::from_column_slice(&cfg.x0);
    let y = Vector::from_column_slice(&cfg.y);
    let sol = hum_solve_terminal(&schedule, &x0, &y)?;
    let states = forward_linear(&schedule, &x0, &sol.bias)?;
    let terminal_error = (states.last().expect("non-empty") - &y).norm();
    let pairing = duality_pairing(&schedule, &sol.bias, &sol.lambda_terminal)?;
    Ok(HumOutcome {
        times: schedule.times(),
        states: states.iter().map(|v| v.iter().copied().collect()).collect(),
        costates: sol
            .adjoint
            .costates()
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect(),
        bias: sol
            .bias
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect(),
        terminal_error,
        gramian_condition: sol.gramian_condition,
        relative_duality_gap: pairing.relative_gap(),
        pairing,
    })
}

/// HUM bias for the stacked linear system: `hum.csv` with state, costate and bias.
pub fn run_hum(cfg: &ExperimentConfig) -> Result<(HumOutcome, Manifest)> {
    let started = std::time::Instant::now();
    let o = compute_hum(&cfg.hum)?;
    let mut out = OutputDir::create(&cfg.output_dir.join("hum"))?;
    let n = o.states[0].len();
    let d = o.bias[0].len();
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("x_{i}")));
    header.extend((0..n).map(|i| format!("lambda_{i}")));
    header.extend((0..d).map(|i| format!("b_{i}")));
    let mut t = CsvTable::new(&header);
    for k in 0..o.times.len() {
        let mut row = vec![o.times[k]];
        row.extend(&o.states[k]);
        row.extend(&o.costates[k]);
        row.extend(&o.bias[k]);
        t.push(&row);
    }
    out.write_csv("hum.csv", &t)?;
    let mut notes = ManifestNotes::default();
    notes.metric("terminal_error", o.terminal_error);
    notes.metric("gramian_condition", o.gramian_condition);
    notes.metric("duality_terminal", o.pairing.terminal);
    notes.metric("duality_quadrature", o.pairing.quadrature);
    notes.metric("relative_duality_gap", o.relative_duality_gap);
    notes.assume("activation", "identity (linear system)");
    notes.assume(
        "bias",
        "shared by all particles: b(t) = sum of particle costates",
    );
    let manifest = out.finish("hum", cfg.seed, &cfg.hum, notes, started)?;
    Ok((o, manifest))
}
