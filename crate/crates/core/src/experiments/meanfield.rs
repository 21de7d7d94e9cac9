use rayon::prelude::*;
use serde::Serialize;

use super::common::{
    descend, error_values, fit_nodes, node_indices, write_field, write_nodes, DescentOutcome,
};
use super::config::{ExperimentConfig, MeanFieldConfig};
use super::micro::{descent_notes, load_surrogate, node_residual, write_trace};
use super::output::{svg_lines, CsvTable, Manifest, ManifestNotes, OutputDir};
use super::rng::{stream_rng, stream_seed, Stream};
use crate::dynamics::ControlSchedule;
use crate::meanfield::{
    loss_meanfield, solve_meanfield, solve_meanfield_snapshots, wasserstein1_cdf, Density1D,
    MonteCarloEstimate,
};
use crate::surrogate::{
    relative_errors, surrogate_eval, ErrorField, KernelSurrogate, ParamGrid, ParamPoint,
};
use crate::Result;

/// Initial density, grid and target law of the transport experiment.
#[derive(Clone, Debug)]
pub struct MeanFieldProblem {
    pub cfg: MeanFieldConfig,
    pub grid: ParamGrid,
    pub rho0: Density1D,
    /// Density at `T` under the grid-centre parameters.
    pub target: Density1D,
    /// Seed shared by every loss evaluation, so the Monte-Carlo noise is common
    /// to all grid points.
    pub sampling_seed: u64,
}

impl MeanFieldProblem {
    pub fn new(cfg: &MeanFieldConfig, seed: u64) -> Result<Self> {
        let grid = ParamGrid::linspace(
            (cfg.domain.w_min, cfg.domain.w_max),
            cfg.grid_w,
            (cfg.domain.b_min, cfg.domain.b_max),
            cfg.grid_b,
        )?;
        let cells = Density1D::cell_count(cfg.xmin, cfg.xmax, cfg.dx)?;
        let rho0 = Density1D::gaussian(cfg.xmin, cfg.xmax, cells, cfg.initial_mean, cfg.spread())?;
        let mut problem = Self {
            cfg: cfg.clone(),
            grid,
            target: rho0.clone(),
            rho0,
            sampling_seed: stream_seed(seed, Stream::MeanFieldSampling),
        };
        problem.target = problem.solve(problem.grid.center())?;
        Ok(problem)
    }

    pub fn schedule(&self, p: ParamPoint) -> Result<ControlSchedule> {
        ControlSchedule::scalar(p.w, p.b, self.cfg.t0, self.cfg.t_end, self.cfg.dt)
    }

    pub fn solve(&self, p: ParamPoint) -> Result<Density1D> {
        solve_meanfield(&self.rho0, &self.schedule(p)?, self.cfg.activation)
    }

    pub fn loss(&self, p: ParamPoint) -> Result<MonteCarloEstimate> {
        let mu = self.solve(p)?;
        loss_meanfield(
            &mu,
            &self.target,
            self.cfg.loss,
            self.cfg.samples,
            self.cfg.repeats,
            self.sampling_seed,
        )
    }

    pub fn fit(&self, seed: u64) -> Result<(Vec<usize>, Vec<f64>, KernelSurrogate)> {
        let mut rng = stream_rng(seed, Stream::MeanFieldNodes);
        let indices = node_indices(&self.grid, &self.cfg.surrogate, &mut rng)?;
        let values = indices
            .par_iter()
            .map(|&i| self.loss(self.grid.point(i)).map(|e| e.mean))
            .collect::<Result<Vec<f64>>>()?;
        let s = fit_nodes(&self.grid, &indices, &values, &self.cfg.surrogate)?;
        Ok((indices, values, s))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanFieldSurfaceOutcome {
    pub grid: ParamGrid,
    pub truth: Vec<f64>,
    pub stderr: Vec<f64>,
    pub approx: Vec<f64>,
    pub errors: ErrorField,
    pub node_indices: Vec<usize>,
    pub node_values: Vec<f64>,
    pub node_residual: f64,
    pub surrogate: KernelSurrogate,
}

pub fn compute_mf_surface(cfg: &MeanFieldConfig, seed: u64) -> Result<MeanFieldSurfaceOutcome> {
    let problem = MeanFieldProblem::new(cfg, seed)?;
    let points = problem.grid.points();
    let estimates = points
        .par_iter()
        .map(|p| problem.loss(*p))
        .collect::<Result<Vec<MonteCarloEstimate>>>()?;
    let truth: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
    let stderr = estimates.iter().map(|e| e.stderr).collect();
    let (node_indices, node_values, surrogate) = problem.fit(seed)?;
    let approx = points
        .par_iter()
        .map(|p| surrogate_eval(&surrogate, *p))
        .collect();
    let errors = relative_errors(&surrogate, &points, &truth)?;
    let node_residual = node_residual(&surrogate, &problem.grid, &node_indices, &node_values);
    Ok(MeanFieldSurfaceOutcome {
        grid: problem.grid,
        truth,
        stderr,
        approx,
        errors,
        node_indices,
        node_values,
        node_residual,
        surrogate,
    })
}

fn common_assumptions(notes: &mut ManifestNotes, cfg: &MeanFieldConfig) {
    notes.assume(
        "initial_spread",
        format!("{} read as {:?}", cfg.initial_spread, cfg.spread_kind),
    );
    notes.assume("boundary", "zero inflow, free outflow");
    notes.assume(
        "target",
        "finite-volume density at T under the grid-centre parameters",
    );
    notes.assume(
        "sampling",
        "one seed shared by every grid point; all sample pairs per repeat",
    );
    notes.assume("node_placement", format!("{:?}", cfg.surrogate.placement));
}

/// Monte-Carlo loss on the grid, surrogate fit and relative-error field.
pub fn run_mf_surface(cfg: &ExperimentConfig) -> Result<(MeanFieldSurfaceOutcome, Manifest)> {
    let started = std::time::Instant::now();
    let o = compute_mf_surface(&cfg.meanfield, cfg.seed)?;
    let mut out = OutputDir::create(&cfg.output_dir.join("mf_surface"))?;
    let mut t = CsvTable::new(&["w", "b", "loss", "stderr"]);
    for (k, (v, s)) in o.truth.iter().zip(&o.stderr).enumerate() {
        let p = o.grid.point(k);
        t.push(&[p.w, p.b, *v, *s]);
    }
    out.write_csv("loss_true.csv", &t)?;
    let nb = o.grid.b.len();
    let cols: Vec<Vec<f64>> = o.truth.chunks(nb).map(|c| c.to_vec()).collect();
    out.write(
        "loss_true.svg",
        &super::output::svg_heatmap("Monte-Carlo loss", &o.grid.w, &o.grid.b, &cols, false),
    )?;
    write_field(
        &mut out,
        "loss_surrogate",
        "loss",
        &o.grid,
        &o.approx,
        Some(("Kernel surrogate", false)),
    )?;
    write_field(
        &mut out,
        "relerr",
        "relerr",
        &o.grid,
        &error_values(&o.errors),
        Some(("Relative error", true)),
    )?;
    write_nodes(&mut out, &o.grid, &o.node_indices, &o.node_values)?;
    out.write("surrogate.json", &o.surrogate.to_json()?)?;
    let mut notes = ManifestNotes::default();
    notes.metric("grid_points", o.grid.len());
    notes.metric("nodes", o.node_indices.len());
    notes.metric("relerr_min", o.errors.min);
    notes.metric("relerr_max", o.errors.max);
    notes.metric("node_residual", o.node_residual);
    notes.metric("jitter", o.surrogate.jitter());
    notes.metric("max_stderr", o.stderr.iter().copied().fold(0.0, f64::max));
    common_assumptions(&mut notes, &cfg.meanfield);
    let manifest = out.finish("mf_surface", cfg.seed, &cfg.meanfield, notes, started)?;
    Ok((o, manifest))
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanFieldDescentOutcome {
    pub descent: DescentOutcome,
    pub rho0: Density1D,
    pub target: Density1D,
    pub start_final: Density1D,
    pub optimized_final: Density1D,
    /// Exact W1 between the optimised and the target density.
    pub w1_to_target: f64,
    /// Standard error of the Monte-Carlo loss at the optimised parameters.
    pub loss_stderr: f64,
    /// `2·dx + 3·stderr`.
    pub w1_bound: f64,
    pub snapshots_start: Vec<(f64, Density1D)>,
    pub snapshots_optimized: Vec<(f64, Density1D)>,
}

pub fn compute_mf_descent(cfg: &MeanFieldConfig, seed: u64) -> Result<MeanFieldDescentOutcome> {
    let problem = MeanFieldProblem::new(cfg, seed)?;
    let surrogate = match &cfg.surrogate_path {
        Some(path) => load_surrogate(path)?,
        None => problem.fit(seed)?.2,
    };
    let domain = cfg.domain.domain()?;
    let descent = descend(&surrogate, &problem.grid, &domain, &cfg.descent)?;
    let opt = descent.final_point();
    let snapshots_start = solve_meanfield_snapshots(
        &problem.rho0,
        &problem.schedule(descent.start)?,
        cfg.activation,
        cfg.snapshot_every,
    )?;
    let snapshots_optimized = solve_meanfield_snapshots(
        &problem.rho0,
        &problem.schedule(opt)?,
        cfg.activation,
        cfg.snapshot_every,
    )?;
    let optimized_final = snapshots_optimized
        .last()
        .expect("final snapshot")
        .1
        .clone();
    let w1_to_target = wasserstein1_cdf(&optimized_final, &problem.target);
    let loss_stderr = problem.loss(opt)?.stderr;
    Ok(MeanFieldDescentOutcome {
        start_final: snapshots_start.last().expect("final snapshot").1.clone(),
        w1_bound: 2.0 * problem.rho0.dx() + 3.0 * loss_stderr,
        descent,
        rho0: problem.rho0,
        target: problem.target,
        optimized_final,
        w1_to_target,
        loss_stderr,
        snapshots_start,
        snapshots_optimized,
    })
}

/// Projected descent on the mean-field surrogate and density snapshots.
pub fn run_mf_descent(cfg: &ExperimentConfig) -> Result<(MeanFieldDescentOutcome, Manifest)> {
    let started = std::time::Instant::now();
    let o = compute_mf_descent(&cfg.meanfield, cfg.seed)?;
    let mut out = OutputDir::create(&cfg.output_dir.join("mf_descent"))?;
    write_trace(&mut out, &o.descent)?;
    let x = o.rho0.centers();
    let mut t = CsvTable::new(&[
        "x_center",
        "initial",
        "target",
        "start_final",
        "optimized_final",
    ]);
    for (j, xj) in x.iter().enumerate() {
        t.push(&[
            *xj,
            o.rho0.cells()[j],
            o.target.cells()[j],
            o.start_final.cells()[j],
            o.optimized_final.cells()[j],
        ]);
    }
    out.write_csv("densities.csv", &t)?;
    let mut snaps = CsvTable::new(&["run", "t", "x_center", "value"]);
    for (label, list) in [
        ("start", &o.snapshots_start),
        ("optimized", &o.snapshots_optimized),
    ] {
        for (time, rho) in list {
            for (j, v) in rho.cells().iter().enumerate() {
                snaps.push_cells(vec![
                    label.to_string(),
                    super::output::fmt_float(*time),
                    super::output::fmt_float(rho.center(j)),
                    super::output::fmt_float(*v),
                ]);
            }
        }
    }
    out.write_csv("snapshots.csv", &snaps)?;
    out.write(
        "densities.svg",
        &svg_lines(
            "Densities at final time",
            "x",
            "density",
            &[
                ("initial", &x, o.rho0.cells()),
                ("target", &x, o.target.cells()),
                ("start", &x, o.start_final.cells()),
                ("optimised", &x, o.optimized_final.cells()),
            ],
        ),
    )?;
    let mut notes = ManifestNotes::default();
    descent_notes(&mut notes, &o.descent);
    notes.metric("w1_to_target", o.w1_to_target);
    notes.metric("w1_bound", o.w1_bound);
    notes.metric("loss_stderr", o.loss_stderr);
    common_assumptions(&mut notes, &cfg.meanfield);
    notes.assume("start", format!("{:?}", cfg.meanfield.descent.start));
    let manifest = out.finish("mf_descent", cfg.seed, &cfg.meanfield, notes, started)?;
    Ok((o, manifest))
}
