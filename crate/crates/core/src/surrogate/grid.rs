use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::ParamPoint;
use crate::{Error, Result};

/// Tensor grid of `(w, b)` values; points are ordered with `w` outermost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamGrid {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + i as f64 * step })
        .collect()
}

impl ParamGrid {
    /// Equally spaced axes including both end points.
    pub fn linspace(
        w_range: (f64, f64),
        nw: usize,
        b_range: (f64, f64),
        nb: usize,
    ) -> Result<Self> {
        if nw == 0 || nb == 0 {
            return Err(Error::config(
                "parameter grid needs at least one point per axis",
            ));
        }
        if !(w_range.1 >= w_range.0 && b_range.1 >= b_range.0) {
            return Err(Error::config("parameter grid range is reversed"));
        }
        Ok(Self {
            w: linspace(w_range.0, w_range.1, nw),
            b: linspace(b_range.0, b_range.1, nb),
        })
    }

    pub fn len(&self) -> usize {
        self.w.len() * self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, iw: usize, ib: usize) -> usize {
        iw * self.b.len() + ib
    }

    pub fn point(&self, k: usize) -> ParamPoint {
        let nb = self.b.len();
        ParamPoint::new(self.w[k / nb], self.b[k % nb])
    }

    pub fn points(&self) -> Vec<ParamPoint> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// The middle grid point (lower middle for even axis lengths).
    pub fn center(&self) -> ParamPoint {
        ParamPoint::new(
            self.w[(self.w.len() - 1) / 2],
            self.b[(self.b.len() - 1) / 2],
        )
    }
}

/// `n` distinct grid indices placed by Latin-hypercube stratification: each axis
/// is cut into `n` strata, strata are paired by random permutations, and a
/// uniform draw inside each stratum pair is snapped to the grid. A point that
/// lands on an index already taken moves to the nearest free index (in grid
/// steps, ties broken by index), so the result is a pure function of the RNG.
pub fn stratified_nodes<R: Rng + ?Sized>(
    grid: &ParamGrid,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n == 0 || n > grid.len() {
        return Err(Error::config(format!(
            "cannot place {n} distinct nodes on a grid of {} points",
            grid.len()
        )));
    }
    let (nw, nb) = (grid.w.len(), grid.b.len());
    let mut pw: Vec<usize> = (0..n).collect();
    let mut pb: Vec<usize> = (0..n).collect();
    pw.shuffle(rng);
    pb.shuffle(rng);
    let mut taken = vec![false; grid.len()];
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let uw = (pw[k] as f64 + rng.random::<f64>()) / n as f64;
        let ub = (pb[k] as f64 + rng.random::<f64>()) / n as f64;
        let iw = ((uw * nw as f64) as usize).min(nw - 1);
        let ib = ((ub * nb as f64) as usize).min(nb - 1);
        let mut best = grid.index(iw, ib);
        if taken[best] {
            best = (0..grid.len())
                .filter(|&j| !taken[j])
                .min_by_key(|&j| {
                    let (jw, jb) = (j / nb, j % nb);
                    (jw.abs_diff(iw).pow(2) + jb.abs_diff(ib).pow(2), j)
                })
                .expect("fewer nodes than grid points");
        }
        taken[best] = true;
        out.push(best);
    }
    Ok(out)
}
