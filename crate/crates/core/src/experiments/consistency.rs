use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ConsistencyConfig, ExperimentConfig, MeanFieldConfig};
use super::output::{svg_lines, CsvTable, Manifest, ManifestNotes, OutputDir};
use super::rng::{stream_seed, Stream};
use crate::dynamics::ControlSchedule;
use crate::meanfield::{
    push_forward_particles, solve_meanfield, wasserstein1_cdf, Density1D, MonteCarloEstimate,
};
use crate::surrogate::ParamGrid;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub w1: MonteCarloEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyOutcome {
    pub w: f64,
    pub b: f64,
    pub dx: f64,
    pub rows: Vec<ConsistencyRow>,
    /// W1 between pushed samples and the initial density under a zero field.
    pub zero_field: MonteCarloEstimate,
}

impl ConsistencyOutcome {
    /// Whether each mean W1 is at most the previous one plus two standard errors.
    pub fn non_increasing_within(&self, k: f64) -> bool {
        self.rows.windows(2).all(|r| {
            let tol = k * r[0].w1.stderr.max(r[1].w1.stderr);
            r[1].w1.mean <= r[0].w1.mean + tol
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn w1_study(
    rho0: &Density1D,
    reference: &Density1D,
    ctrl: &ControlSchedule,
    mf: &MeanFieldConfig,
    n: usize,
    repeats: usize,
    seed: u64,
    tag: u64,
) -> Result<MonteCarloEstimate> {
    let values = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((tag << 32) | r as u64);
            push_forward_particles(n, rho0, ctrl, mf.activation, &mut rng)
                .map(|s| wasserstein1_cdf(&s, reference))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MonteCarloEstimate::from_repeats(values))
}

pub fn compute_consistency(
    mf: &MeanFieldConfig,
    cfg: &ConsistencyConfig,
    seed: u64,
) -> Result<ConsistencyOutcome> {
    if cfg.repeats == 0 || cfg.sample_sizes.is_empty() {
        return Err(Error::config(
            "consistency needs sample sizes and at least one repeat",
        ));
    }
    let grid = ParamGrid::linspace(
        (mf.domain.w_min, mf.domain.w_max),
        mf.grid_w,
        (mf.domain.b_min, mf.domain.b_max),
        mf.grid_b,
    )?;
    let center = grid.center();
    let (w, b) = (cfg.w.unwrap_or(center.w), cfg.b.unwrap_or(center.b));
    let cells = Density1D::cell_count(mf.xmin, mf.xmax, mf.dx)?;
    let rho0 = Density1D::gaussian(mf.xmin, mf.xmax, cells, mf.initial_mean, mf.spread())?;
    let ctrl = ControlSchedule::scalar(w, b, mf.t0, mf.t_end, mf.dt)?;
    let fv = solve_meanfield(&rho0, &ctrl, mf.activation)?;
    let base = stream_seed(seed, Stream::Consistency);
    let mut rows = Vec::with_capacity(cfg.sample_sizes.len());
    for (i, &n) in cfg.sample_sizes.iter().enumerate() {
        rows.push(ConsistencyRow {
            n,
            w1: w1_study(&rho0, &fv, &ctrl, mf, n, cfg.repeats, base, i as u64)?,
        });
    }
    let still = ControlSchedule::scalar(0.0, 0.0, mf.t0, mf.t_end, mf.dt)?;
    let largest = *cfg.sample_sizes.iter().max().expect("non-empty");
    let zero_field = w1_study(
        &rho0,
        &rho0,
        &still,
        mf,
        largest,
        cfg.repeats,
        base,
        u32::MAX as u64,
    )?;
    Ok(ConsistencyOutcome {
        w,
        b,
        dx: rho0.dx(),
        rows,
        zero_field,
    })
}

/// Particle push-forward against the finite-volume solution: `w1_vs_n.csv`.
pub fn run_consistency(cfg: &ExperimentConfig) -> Result<(ConsistencyOutcome, Manifest)> {
    let started = std::time::Instant::now();
    let o = compute_consistency(&cfg.meanfield, &cfg.consistency, cfg.seed)?;
    let mut out = OutputDir::create(&cfg.output_dir.join("consistency"))?;
    let mut t = CsvTable::new(&["n", "w1_mean", "w1_stderr", "bound_2dx"]);
    for r in &o.rows {
        t.push_cells(vec![
            r.n.to_string(),
            super::output::fmt_float(r.w1.mean),
            super::output::fmt_float(r.w1.stderr),
            super::output::fmt_float(2.0 * o.dx),
        ]);
    }
    out.write_csv("w1_vs_n.csv", &t)?;
    let ns: Vec<f64> = o.rows.iter().map(|r| (r.n as f64).log10()).collect();
    let w1: Vec<f64> = o.rows.iter().map(|r| r.w1.mean).collect();
    out.write(
        "w1_vs_n.svg",
        &svg_lines(
            "Particles against finite volumes",
            "log10 n",
            "W1",
            &[("W1", &ns, &w1)],
        ),
    )?;
    let mut notes = ManifestNotes::default();
    notes.metric("w", o.w);
    notes.metric("b", o.b);
    notes.metric("w1_largest_n", o.rows.last().map(|r| r.w1.mean));
    notes.metric(
        "non_increasing_within_2_stderr",
        o.non_increasing_within(2.0),
    );
    notes.metric("zero_field_w1", o.zero_field.mean);
    notes.metric("zero_field_w1_stderr", o.zero_field.stderr);
    notes.assume(
        "distance",
        "exact W1 between the empirical law and the normalised cell density",
    );
    notes.assume(
        "initial_spread",
        format!(
            "{} read as {:?}",
            cfg.meanfield.initial_spread, cfg.meanfield.spread_kind
        ),
    );
    let manifest = out.finish(
        "consistency",
        cfg.seed,
        &(&cfg.meanfield, &cfg.consistency),
        notes,
        started,
    )?;
    Ok((o, manifest))
}
