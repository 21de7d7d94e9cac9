use rayon::prelude::*;
use serde::Serialize;

use super::common::{
    descend, error_values, fit_nodes, node_indices, write_field, write_nodes, DescentOutcome,
};
use super::config::{ExperimentConfig, MicroConfig};
use super::output::{svg_lines, CsvTable, Manifest, ManifestNotes, OutputDir};
use super::rng::{stream_rng, Stream};
use crate::dynamics::{
    integrate_ensemble, integrate_ode, loss_micro, ControlSchedule, ParticleEnsemble,
};
use crate::surrogate::{
    relative_errors, surrogate_eval, ErrorField, KernelSurrogate, ParamGrid, ParamPoint,
};
use crate::{Error, Result, Vector};

/// Data set, grid and target of the particle experiment.
#[derive(Clone, Debug)]
pub struct MicroProblem {
    pub cfg: MicroConfig,
    pub grid: ParamGrid,
    pub ensemble: ParticleEnsemble,
    /// Common target: ensemble mean at `T` under the grid-centre parameters.
    pub target: f64,
}

impl MicroProblem {
    pub fn new(cfg: &MicroConfig, seed: u64) -> Result<Self> {
        let grid = ParamGrid::linspace(
            (cfg.domain.w_min, cfg.domain.w_max),
            cfg.grid_w,
            (cfg.domain.b_min, cfg.domain.b_max),
            cfg.grid_b,
        )?;
        let mut rng = stream_rng(seed, Stream::MicroInitialData);
        let data =
            ParticleEnsemble::uniform_scalar(cfg.particles, cfg.x0_min, cfg.x0_max, 0.0, &mut rng)?;
        let mut problem = Self {
            cfg: cfg.clone(),
            grid,
            ensemble: data,
            target: 0.0,
        };
        let finals = problem.finals(problem.grid.center())?;
        problem.target = finals.iter().map(|x| x[0]).sum::<f64>() / finals.len() as f64;
        problem.ensemble =
            problem
                .ensemble
                .with_targets(vec![Vector::from_element(1, problem.target); cfg.particles])?;
        Ok(problem)
    }

    pub fn schedule(&self, p: ParamPoint) -> Result<ControlSchedule> {
        ControlSchedule::scalar(p.w, p.b, self.cfg.t0, self.cfg.t_end, self.cfg.dt)
    }

    pub fn finals(&self, p: ParamPoint) -> Result<Vec<Vector>> {
        integrate_ensemble(&self.ensemble, &self.schedule(p)?, self.cfg.activation)
    }

    pub fn loss(&self, p: ParamPoint) -> Result<f64> {
        loss_micro(&self.finals(p)?, self.ensemble.targets(), self.cfg.loss)
    }

    pub fn final_mean(&self, p: ParamPoint) -> Result<f64> {
        let f = self.finals(p)?;
        Ok(f.iter().map(|x| x[0]).sum::<f64>() / f.len() as f64)
    }

    /// Ensemble mean at every grid time.
    pub fn mean_trajectory(&self, p: ParamPoint) -> Result<(Vec<f64>, Vec<f64>)> {
        let schedule = self.schedule(p)?;
        let paths = self
            .ensemble
            .states()
            .par_iter()
            .map(|x0| integrate_ode(x0, &schedule, self.cfg.activation).map(|t| t.scalar_path()))
            .collect::<Result<Vec<_>>>()?;
        let n = paths.len() as f64;
        let means = (0..paths[0].len())
            .map(|k| paths.iter().map(|p| p[k]).sum::<f64>() / n)
            .collect();
        Ok((schedule.times(), means))
    }

    /// Observation nodes and the surrogate fitted to the losses there.
    pub fn fit(&self, seed: u64) -> Result<(Vec<usize>, Vec<f64>, KernelSurrogate)> {
        let mut rng = stream_rng(seed, Stream::MicroNodes);
        let indices = node_indices(&self.grid, &self.cfg.surrogate, &mut rng)?;
        let values = indices
            .par_iter()
            .map(|&i| self.loss(self.grid.point(i)))
            .collect::<Result<Vec<f64>>>()?;
        let s = fit_nodes(&self.grid, &indices, &values, &self.cfg.surrogate)?;
        Ok((indices, values, s))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceOutcome {
    pub grid: ParamGrid,
    pub truth: Vec<f64>,
    pub approx: Vec<f64>,
    pub errors: ErrorField,
    pub node_indices: Vec<usize>,
    pub node_values: Vec<f64>,
    /// `max |z − ℒ̂| / |z|` over the nodes.
    pub node_residual: f64,
    pub surrogate: KernelSurrogate,
    pub target: f64,
}

pub fn compute_micro_surface(cfg: &MicroConfig, seed: u64) -> Result<SurfaceOutcome> {
    let problem = MicroProblem::new(cfg, seed)?;
    let points = problem.grid.points();
    let truth = points
        .par_iter()
        .map(|p| problem.loss(*p))
        .collect::<Result<Vec<f64>>>()?;
    let (node_indices, node_values, surrogate) = problem.fit(seed)?;
    let approx: Vec<f64> = points
        .par_iter()
        .map(|p| surrogate_eval(&surrogate, *p))
        .collect();
    let errors = relative_errors(&surrogate, &points, &truth)?;
    let node_residual = node_residual(&surrogate, &problem.grid, &node_indices, &node_values);
    Ok(SurfaceOutcome {
        grid: problem.grid,
        truth,
        approx,
        errors,
        node_indices,
        node_values,
        node_residual,
        surrogate,
        target: problem.target,
    })
}

pub(crate) fn node_residual(
    s: &KernelSurrogate,
    grid: &ParamGrid,
    indices: &[usize],
    values: &[f64],
) -> f64 {
    indices
        .iter()
        .zip(values)
        .map(|(&i, z)| (surrogate_eval(s, grid.point(i)) - z).abs() / z.abs())
        .fold(0.0, f64::max)
}

pub(crate) fn write_surface(
    out: &mut OutputDir,
    o: &SurfaceOutcome,
    notes: &mut ManifestNotes,
) -> Result<()> {
    write_field(
        out,
        "loss_true",
        "loss",
        &o.grid,
        &o.truth,
        Some(("True loss", false)),
    )?;
    write_field(
        out,
        "loss_surrogate",
        "loss",
        &o.grid,
        &o.approx,
        Some(("Kernel surrogate", false)),
    )?;
    write_field(
        out,
        "relerr",
        "relerr",
        &o.grid,
        &error_values(&o.errors),
        Some(("Relative error", true)),
    )?;
    write_nodes(out, &o.grid, &o.node_indices, &o.node_values)?;
    out.write("surrogate.json", &o.surrogate.to_json()?)?;
    notes.metric("grid_points", o.grid.len());
    notes.metric("nodes", o.node_indices.len());
    notes.metric("relerr_min", o.errors.min);
    notes.metric("relerr_max", o.errors.max);
    notes.metric("relerr_skipped", o.errors.skipped);
    notes.metric("node_residual", o.node_residual);
    notes.metric("jitter", o.surrogate.jitter());
    notes.metric("refinement_steps", o.surrogate.report().refinement_steps);
    notes.metric("target", o.target);
    Ok(())
}

/// True loss on the grid, surrogate fit and relative-error field.
pub fn run_micro_surface(cfg: &ExperimentConfig) -> Result<(SurfaceOutcome, Manifest)> {
    let started = std::time::Instant::now();
    let outcome = compute_micro_surface(&cfg.micro, cfg.seed)?;
    let mut out = OutputDir::create(&cfg.output_dir.join("micro_surface"))?;
    let mut notes = ManifestNotes::default();
    write_surface(&mut out, &outcome, &mut notes)?;
    notes.assume(
        "node_placement",
        format!("{:?}", cfg.micro.surrogate.placement),
    );
    notes.assume(
        "target",
        "ensemble mean at T under the grid-centre parameters",
    );
    notes.assume(
        "seed_streams",
        "initial data on stream 1, node placement on stream 2",
    );
    let manifest = out.finish("micro_surface", cfg.seed, &cfg.micro, notes, started)?;
    Ok((outcome, manifest))
}

#[derive(Clone, Debug, Serialize)]
pub struct MicroDescentOutcome {
    pub descent: DescentOutcome,
    pub target: f64,
    pub center: ParamPoint,
    pub final_mean: f64,
    pub times: Vec<f64>,
    pub mean_start: Vec<f64>,
    pub mean_final: Vec<f64>,
    pub mean_center: Vec<f64>,
}

impl MicroDescentOutcome {
    pub fn relative_target_error(&self) -> f64 {
        (self.final_mean - self.target).abs() / self.target.abs()
    }
}

pub(crate) fn load_surrogate(path: &std::path::Path) -> Result<KernelSurrogate> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read surrogate {}: {e}", path.display())))?;
    KernelSurrogate::from_json(&text)
}

pub fn compute_micro_descent(cfg: &MicroConfig, seed: u64) -> Result<MicroDescentOutcome> {
    let problem = MicroProblem::new(cfg, seed)?;
    let surrogate = match &cfg.surrogate_path {
        Some(path) => load_surrogate(path)?,
        None => problem.fit(seed)?.2,
    };
    let domain = cfg.domain.domain()?;
    let descent = descend(&surrogate, &problem.grid, &domain, &cfg.descent)?;
    let center = problem.grid.center();
    let (times, mean_start) = problem.mean_trajectory(descent.start)?;
    let (_, mean_final) = problem.mean_trajectory(descent.final_point())?;
    let (_, mean_center) = problem.mean_trajectory(center)?;
    Ok(MicroDescentOutcome {
        final_mean: *mean_final.last().expect("non-empty"),
        descent,
        target: problem.target,
        center,
        times,
        mean_start,
        mean_final,
        mean_center,
    })
}

pub(crate) fn write_trace(out: &mut OutputDir, d: &DescentOutcome) -> Result<()> {
    let mut buf = Vec::new();
    d.trace.write_csv(&mut buf)?;
    out.write("trace.csv", &String::from_utf8(buf).expect("ASCII CSV"))?;
    let it: Vec<f64> = (0..d.trace.iterates.len()).map(|k| k as f64).collect();
    let obj: Vec<f64> = d.trace.iterates.iter().map(|x| x.1).collect();
    let w: Vec<f64> = d.trace.iterates.iter().map(|x| x.0.w).collect();
    let b: Vec<f64> = d.trace.iterates.iter().map(|x| x.0.b).collect();
    out.write(
        "trace_objective.svg",
        &svg_lines(
            "Surrogate objective",
            "iteration",
            "objective",
            &[("objective", &it, &obj)],
        ),
    )?;
    out.write(
        "trace_w.svg",
        &svg_lines("w against cost", "w", "objective", &[("w", &w, &obj)]),
    )?;
    out.write(
        "trace_b.svg",
        &svg_lines("b against cost", "b", "objective", &[("b", &b, &obj)]),
    )?;
    Ok(())
}

pub(crate) fn descent_notes(notes: &mut ManifestNotes, d: &DescentOutcome) {
    let (p, f) = d.trace.last();
    notes.metric("start_w", d.start.w);
    notes.metric("start_b", d.start.b);
    notes.metric("final_w", p.w);
    notes.metric("final_b", p.b);
    notes.metric("final_objective", f);
    notes.metric("grid_min_w", d.grid_minimum.0.w);
    notes.metric("grid_min_b", d.grid_minimum.0.b);
    notes.metric("grid_min_objective", d.grid_minimum.1);
    notes.metric("iterations", d.trace.iterations());
    notes.metric("stop_reason", d.trace.stop_reason);
    notes.metric("non_increasing_after_10", d.non_increasing_after(10));
}

/// Projected descent on the surrogate and the ensemble-mean trajectories.
pub fn run_micro_descent(cfg: &ExperimentConfig) -> Result<(MicroDescentOutcome, Manifest)> {
    let started = std::time::Instant::now();
    let o = compute_micro_descent(&cfg.micro, cfg.seed)?;
    let mut out = OutputDir::create(&cfg.output_dir.join("micro_descent"))?;
    write_trace(&mut out, &o.descent)?;
    let mut t = CsvTable::new(&["t", "mean_start", "mean_final", "mean_center", "target"]);
    for k in 0..o.times.len() {
        t.push(&[
            o.times[k],
            o.mean_start[k],
            o.mean_final[k],
            o.mean_center[k],
            o.target,
        ]);
    }
    out.write_csv("mean_trajectories.csv", &t)?;
    let target = vec![o.target; o.times.len()];
    out.write(
        "mean_trajectories.svg",
        &svg_lines(
            "Ensemble mean",
            "t",
            "mean x(t)",
            &[
                ("start", &o.times, &o.mean_start),
                ("optimised", &o.times, &o.mean_final),
                ("centre", &o.times, &o.mean_center),
                ("target", &o.times, &target),
            ],
        ),
    )?;
    let mut notes = ManifestNotes::default();
    descent_notes(&mut notes, &o.descent);
    notes.metric("target", o.target);
    notes.metric("final_mean", o.final_mean);
    notes.metric("relative_target_error", o.relative_target_error());
    notes.assume("start", format!("{:?}", cfg.micro.descent.start));
    notes.assume(
        "surrogate",
        cfg.micro
            .surrogate_path
            .as_ref()
            .map_or("refitted from the seeded nodes".to_string(), |p| {
                format!("loaded from {}", p.display())
            }),
    );
    let manifest = out.finish("micro_descent", cfg.seed, &cfg.micro, notes, started)?;
    Ok((o, manifest))
}
