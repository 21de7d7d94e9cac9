use rand::Rng;
use serde::Serialize;

use super::config::{DescentConfig, NodePlacement, StartPoint, SurrogateConfig};
use super::output::{svg_heatmap, CsvTable, OutputDir};
use crate::optimize::{pgd, BoxDomain, DescentTrace};
use crate::surrogate::{
    fit_ridge, stratified_nodes, surrogate_eval, surrogate_grad, ErrorField, KernelSurrogate,
    ParamGrid, ParamPoint,
};
use crate::{Error, Result};

/// Grid indices where the loss is observed.
pub(crate) fn node_indices<R: Rng + ?Sized>(
    grid: &ParamGrid,
    cfg: &SurrogateConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    match &cfg.placement {
        NodePlacement::Stratified => stratified_nodes(grid, cfg.nodes, rng),
        NodePlacement::Explicit { indices } => {
            if let Some(bad) = indices.iter().find(|&&i| i >= grid.len()) {
                return Err(Error::config(format!(
                    "node index {bad} outside a grid of {} points",
                    grid.len()
                )));
            }
            Ok(indices.clone())
        }
    }
}

pub(crate) fn fit_nodes(
    grid: &ParamGrid,
    indices: &[usize],
    values: &[f64],
    cfg: &SurrogateConfig,
) -> Result<KernelSurrogate> {
    let nodes: Vec<ParamPoint> = indices.iter().map(|&i| grid.point(i)).collect();
    fit_ridge(&nodes, values, cfg.gamma, cfg.lambda, cfg.noise_cov)
}

/// Outcome of a projected descent on a surrogate.
#[derive(Clone, Debug, Serialize)]
pub struct DescentOutcome {
    pub start: ParamPoint,
    /// Smallest surrogate value over the parameter grid and where it occurs.
    pub grid_minimum: (ParamPoint, f64),
    pub trace: DescentTrace,
}

impl DescentOutcome {
    pub fn final_point(&self) -> ParamPoint {
        self.trace.last().0
    }

    /// Whether objective values never increase after iteration `after`.
    pub fn non_increasing_after(&self, after: usize) -> bool {
        self.trace
            .iterates
            .iter()
            .skip(after)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1].1 <= w[0].1)
    }
}

pub(crate) fn descend(
    s: &KernelSurrogate,
    grid: &ParamGrid,
    domain: &BoxDomain,
    cfg: &DescentConfig,
) -> Result<DescentOutcome> {
    let grid_minimum = grid
        .points()
        .into_iter()
        .map(|p| (p, surrogate_eval(s, p)))
        .fold((grid.point(0), f64::INFINITY), |best, cur| {
            if cur.1 < best.1 {
                cur
            } else {
                best
            }
        });
    let start = match cfg.start {
        StartPoint::FarthestCorner => domain.farthest_corner(grid_minimum.0),
        StartPoint::Point { w, b } => ParamPoint::new(w, b),
    };
    let trace = pgd(
        |p| surrogate_eval(s, p),
        |p| surrogate_grad(s, p),
        start,
        domain,
        cfg.options(),
    )?;
    Ok(DescentOutcome {
        start,
        grid_minimum,
        trace,
    })
}

/// Writes a `(w, b, value)` field as CSV and, if requested, a heat map.
pub(crate) fn write_field(
    out: &mut OutputDir,
    name: &str,
    column: &str,
    grid: &ParamGrid,
    values: &[f64],
    heatmap: Option<(&str, bool)>,
) -> Result<()> {
    let mut t = CsvTable::new(&["w", "b", column]);
    for (k, v) in values.iter().enumerate() {
        let p = grid.point(k);
        t.push(&[p.w, p.b, *v]);
    }
    out.write_csv(&format!("{name}.csv"), &t)?;
    if let Some((title, log)) = heatmap {
        let nb = grid.b.len();
        let columns: Vec<Vec<f64>> = values.chunks(nb).map(|c| c.to_vec()).collect();
        out.write(
            &format!("{name}.svg"),
            &svg_heatmap(title, &grid.w, &grid.b, &columns, log),
        )?;
    }
    Ok(())
}

pub(crate) fn error_values(field: &ErrorField) -> Vec<f64> {
    field.errors.iter().map(|e| e.unwrap_or(f64::NAN)).collect()
}

pub(crate) fn write_nodes(
    out: &mut OutputDir,
    grid: &ParamGrid,
    indices: &[usize],
    values: &[f64],
) -> Result<()> {
    let mut t = CsvTable::new(&["index", "w", "b", "loss"]);
    for (&i, v) in indices.iter().zip(values) {
        let p = grid.point(i);
        t.push_cells(vec![
            i.to_string(),
            super::output::fmt_float(p.w),
            super::output::fmt_float(p.b),
            super::output::fmt_float(*v),
        ]);
    }
    out.write_csv("nodes.csv", &t)?;
    Ok(())
}
