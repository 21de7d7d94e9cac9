use rand::Rng;
use rayon::prelude::*;

use super::density::{quantile_from, Density1D};
use crate::dynamics::{integrate_final, Activation, ControlSchedule};
use crate::{Error, Result, Vector};

/// Sorted scalar samples, each carrying weight `1/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    points: Vec<f64>,
}

impl SampleSet {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySamples);
        }
        if let Some(&bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                location: "sample set".into(),
                value: bad,
            });
        }
        points.sort_by(f64::total_cmp);
        Ok(Self { points })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().sum::<f64>() / self.points.len() as f64
    }
}

/// Source of independent draws from a one-dimensional law.
pub trait Sampler: Sync {
    fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>>;
}

/// Inverse-CDF sampling of the piecewise-constant density: a uniform `u` picks
/// the cell through the cumulative mass and the position inside it linearly,
/// which is a uniform jitter within the cell.
impl Sampler for Density1D {
    fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        if !(self.mass() > 0.0) {
            return Err(Error::EmptySamples);
        }
        let cum = self.cumulative();
        Ok((0..n)
            .map(|_| quantile_from(&cum, self, rng.random::<f64>()))
            .collect())
    }
}

/// Resampling with replacement from the empirical measure.
impl Sampler for SampleSet {
    fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        Ok((0..n)
            .map(|_| self.points[rng.random_range(0..self.points.len())])
            .collect())
    }
}

/// Draws `n` initial points and pushes each through the neural ODE, returning the
/// sorted final positions. Particles are integrated in parallel; the result does
/// not depend on the thread count.
pub fn push_forward_particles<S: Sampler + ?Sized, R: Rng + ?Sized>(
    n: usize,
    rho0: &S,
    ctrl: &ControlSchedule,
    act: Activation,
    rng: &mut R,
) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    let starts = rho0.sample(n, rng)?;
    let finals = starts
        .par_iter()
        .enumerate()
        .map(|(index, &x)| {
            integrate_final(&Vector::from_element(1, x), ctrl, act)
                .map(|v| v[0])
                .map_err(|e| Error::Particle {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    SampleSet::new(finals)
}

/// Exact Wasserstein-1 distance between two empirical measures.
///
/// Equal sizes use the sorted pairing `(1/n)Σ|a₍ᵢ₎ − b₍ᵢ₎|`. Unequal sizes integrate
/// `|Q_a(u) − Q_b(u)|` over the merged quantile breakpoints `i/n_a`, `j/n_b`,
/// compared in exact integer arithmetic, so no resampling is involved.
pub fn wasserstein1(a: &SampleSet, b: &SampleSet) -> f64 {
    let (pa, pb) = (a.points(), b.points());
    if pa.len() == pb.len() {
        return pa.iter().zip(pb).map(|(x, y)| (x - y).abs()).sum::<f64>() / pa.len() as f64;
    }
    let (na, nb) = (pa.len() as u128, pb.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = 0u128;
    let mut acc = 0.0;
    while i < pa.len() && j < pb.len() {
        let end_a = (i as u128 + 1) * nb;
        let end_b = (j as u128 + 1) * na;
        let end = end_a.min(end_b);
        acc += (pa[i] - pb[j]).abs() * (end - prev) as f64;
        prev = end;
        if end_a == end {
            i += 1;
        }
        if end_b == end {
            j += 1;
        }
    }
    acc / (na * nb) as f64
}

/// A one-dimensional law known through its distribution function, piecewise
/// linear between consecutive breakpoints.
pub trait Cdf {
    /// Sorted points outside of which the law has no kinks or atoms.
    fn breakpoints(&self) -> Vec<f64>;
    /// Right-continuous value `F(x)`.
    fn cdf_at(&self, x: f64) -> f64;
    /// Left limit `F(x⁻)`.
    fn cdf_left(&self, x: f64) -> f64;
}

impl Cdf for SampleSet {
    fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.points.clone();
        v.dedup();
        v
    }

    fn cdf_at(&self, x: f64) -> f64 {
        self.points.partition_point(|&p| p <= x) as f64 / self.points.len() as f64
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.points.partition_point(|&p| p < x) as f64 / self.points.len() as f64
    }
}

/// Mass is normalised, so a density that has lost mass through the boundary is
/// compared as a probability law.
impl Cdf for Density1D {
    fn breakpoints(&self) -> Vec<f64> {
        (0..=self.len()).map(|j| self.interface(j)).collect()
    }

    fn cdf_at(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

/// Exact `W₁ = ∫|F_a − F_b| dx` for laws whose distribution functions are
/// piecewise linear between their breakpoints (empirical measures, cell densities).
pub fn wasserstein1_cdf<A: Cdf + ?Sized, B: Cdf + ?Sized>(a: &A, b: &B) -> f64 {
    let mut xs = a.breakpoints();
    xs.extend(b.breakpoints());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut acc = 0.0;
    for pair in xs.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let d0 = a.cdf_at(lo) - b.cdf_at(lo);
        let d1 = a.cdf_left(hi) - b.cdf_left(hi);
        let h = hi - lo;
        acc += if d0 * d1 >= 0.0 {
            0.5 * h * (d0.abs() + d1.abs())
        } else {
            // the difference crosses zero inside the interval
            0.5 * h * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
        };
    }
    acc
}
