use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// How the second parameter of `N(mean, s)` is read.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianSpread {
    Variance(f64),
    StdDev(f64),
}

impl GaussianSpread {
    pub fn std_dev(self) -> f64 {
        match self {
            GaussianSpread::Variance(v) => v.sqrt(),
            GaussianSpread::StdDev(s) => s,
        }
    }
}

/// Nonnegative cell averages on a uniform grid over `[xmin, xmax]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Density1D {
    xmin: f64,
    xmax: f64,
    dx: f64,
    cells: Vec<f64>,
    mass: f64,
}

impl Density1D {
    pub fn new(xmin: f64, xmax: f64, cells: Vec<f64>) -> Result<Self> {
        if !(xmin.is_finite() && xmax.is_finite() && xmax > xmin) {
            return Err(Error::config(format!(
                "invalid density interval [{xmin}, {xmax}]"
            )));
        }
        if cells.is_empty() {
            return Err(Error::config("density needs at least one cell"));
        }
        if let Some((j, &v)) = cells
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::NonFinite {
                location: format!("density cell {j} (must be finite and nonnegative)"),
                value: v,
            });
        }
        let dx = (xmax - xmin) / cells.len() as f64;
        let mass = dx * cells.iter().sum::<f64>();
        Ok(Self {
            xmin,
            xmax,
            dx,
            cells,
            mass,
        })
    }

    /// Number of cells for spacing `dx`, rejecting spacings that do not tile the interval.
    pub fn cell_count(xmin: f64, xmax: f64, dx: f64) -> Result<usize> {
        let ratio = (xmax - xmin) / dx;
        let n = ratio.round();
        if !(dx > 0.0) || n < 1.0 || (ratio - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::config(format!(
                "dx = {dx} does not tile [{xmin}, {xmax}]"
            )));
        }
        Ok(n as usize)
    }

    /// Gaussian `N(mean, spread)` discretised by exact CDF differences per cell,
    /// then renormalised to unit mass on the interval.
    pub fn gaussian(
        xmin: f64,
        xmax: f64,
        n_cells: usize,
        mean: f64,
        spread: GaussianSpread,
    ) -> Result<Self> {
        let sd = spread.std_dev();
        let normal = Normal::new(mean, sd)
            .map_err(|e| Error::config(format!("gaussian initial density: {e}")))?;
        let dx = (xmax - xmin) / n_cells as f64;
        let edges: Vec<f64> = (0..=n_cells)
            .map(|j| normal.cdf(xmin + j as f64 * dx))
            .collect();
        let total = edges[n_cells] - edges[0];
        if !(total > 0.0) {
            return Err(Error::config(
                "gaussian has no mass on the density interval",
            ));
        }
        let cells = edges
            .windows(2)
            .map(|e| (e[1] - e[0]) / (total * dx))
            .collect();
        Self::new(xmin, xmax, cells)
    }

    /// Unit-mass uniform density on `[lo, hi]`, cell-averaged onto the grid.
    pub fn uniform(xmin: f64, xmax: f64, n_cells: usize, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) || lo < xmin || hi > xmax {
            return Err(Error::config(format!(
                "uniform support [{lo}, {hi}] outside [{xmin}, {xmax}]"
            )));
        }
        let dx = (xmax - xmin) / n_cells as f64;
        let cells = (0..n_cells)
            .map(|j| {
                let a = xmin + j as f64 * dx;
                let overlap = (a + dx).min(hi) - a.max(lo);
                overlap.max(0.0) / ((hi - lo) * dx)
            })
            .collect();
        Self::new(xmin, xmax, cells)
    }

    pub fn with_cells(&self, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != self.cells.len() {
            return Err(Error::Dimension {
                context: "density cells",
                expected: self.cells.len(),
                got: cells.len(),
            });
        }
        Self::new(self.xmin, self.xmax, cells)
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `∫μ dx`, cached at construction.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn center(&self, j: usize) -> f64 {
        self.xmin + (j as f64 + 0.5) * self.dx
    }

    /// Position of interface `j`; interface 0 is `xmin` and interface `len()` is `xmax`.
    pub fn interface(&self, j: usize) -> f64 {
        if j == self.cells.len() {
            self.xmax
        } else {
            self.xmin + j as f64 * self.dx
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells.len()).map(|j| self.center(j)).collect()
    }

    pub fn mean(&self) -> f64 {
        let first: f64 = self
            .cells
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.center(j))
            .sum();
        first * self.dx / self.mass
    }

    /// Normalised cumulative mass at every interface: `cumulative()[j] = F(interface(j))`.
    pub(crate) fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cells.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for c in &self.cells {
            acc += c * self.dx;
            out.push(acc / self.mass);
        }
        *out.last_mut().unwrap() = 1.0;
        out
    }

    /// Distribution function of the normalised piecewise-constant density.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.xmin {
            return 0.0;
        }
        if x >= self.xmax {
            return 1.0;
        }
        let j = (((x - self.xmin) / self.dx) as usize).min(self.cells.len() - 1);
        let left: f64 = self.cells[..j].iter().sum::<f64>() * self.dx;
        let partial = self.cells[j] * (x - self.interface(j));
        ((left + partial) / self.mass).clamp(0.0, 1.0)
    }

    /// Inverse distribution function, linear inside each cell. Needs positive mass.
    pub fn quantile(&self, u: f64) -> f64 {
        quantile_from(&self.cumulative(), self, u)
    }

    /// Writes `x_center,value` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x_center,value")?;
        for (j, v) in self.cells.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.center(j), v)?;
        }
        Ok(())
    }
}

pub(crate) fn quantile_from(cum: &[f64], rho: &Density1D, u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    // first interface whose cumulative mass reaches u
    let k = cum.partition_point(|&c| c < u);
    if k == 0 {
        return rho.xmin;
    }
    if k >= cum.len() {
        return rho.xmax;
    }
    let j = k - 1;
    let span = cum[k] - cum[j];
    let frac = if span > 0.0 { (u - cum[j]) / span } else { 0.0 };
    rho.interface(j) + frac * rho.dx
}
