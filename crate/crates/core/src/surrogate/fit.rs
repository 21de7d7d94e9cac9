use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compensated::{two_sum, CompensatedSum};
use super::dd::Dd;
use super::kernel::{kernel_matrix, scaled_kernel_dd, AxisScale, ParamPoint};
use crate::{Error, Matrix, Result, Vector};

const JITTER_FIRST: i32 = -12;
const JITTER_LAST: i32 = -6;
const MAX_REFINEMENTS: usize = 12;
const REFINED_RESIDUAL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitMethod {
    Interpolation,
    Ridge { lambda: f64, noise_cov: f64 },
    Explicit,
}

/// How a surrogate was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub method: FitMethod,
    /// Diagonal shift `N·λ·s` added by the ridge penalty.
    pub regularization: f64,
    /// Extra diagonal jitter needed for the factorisation to succeed.
    pub jitter: f64,
    pub refinement_steps: usize,
    /// `max_m |z_m − ℒ̂(p_m)| / |z_m|` over the nodes.
    pub max_relative_residual: f64,
}

/// Gaussian-kernel expansion with coefficients stored as `hi + lo` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSurrogate {
    gamma: f64,
    #[serde(default)]
    scale: AxisScale,
    nodes: Vec<ParamPoint>,
    coeffs: Vec<f64>,
    coeffs_lo: Vec<f64>,
    jitter: f64,
    report: FitReport,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!(
            "kernel length scale must be positive, got {gamma}"
        )))
    }
}

fn check_nodes(nodes: &[ParamPoint]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::config("surrogate needs at least one node"));
    }
    if let Some((i, p)) = nodes.iter().enumerate().find(|(_, p)| !p.is_finite()) {
        return Err(Error::NonFinite {
            location: format!("surrogate node {i}"),
            value: if p.w.is_finite() { p.b } else { p.w },
        });
    }
    for i in 0..nodes.len() {
        for j in 0..i {
            if nodes[i] == nodes[j] {
                return Err(Error::DuplicateNodes {
                    first: j,
                    second: i,
                });
            }
        }
    }
    Ok(())
}

impl KernelSurrogate {
    /// Surrogate with prescribed coefficients.
    pub fn from_coefficients(gamma: f64, nodes: Vec<ParamPoint>, coeffs: Vec<f64>) -> Result<Self> {
        check_gamma(gamma)?;
        check_nodes(&nodes)?;
        if coeffs.len() != nodes.len() {
            return Err(Error::Dimension {
                context: "surrogate coefficients",
                expected: nodes.len(),
                got: coeffs.len(),
            });
        }
        if let Some(&bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                location: "surrogate coefficient".into(),
                value: bad,
            });
        }
        let n = coeffs.len();
        Ok(Self {
            gamma,
            scale: AxisScale::default(),
            nodes,
            coeffs,
            coeffs_lo: vec![0.0; n],
            jitter: 0.0,
            report: FitReport {
                method: FitMethod::Explicit,
                regularization: 0.0,
                jitter: 0.0,
                refinement_steps: 0,
                max_relative_residual: f64::NAN,
            },
        })
    }

    pub fn with_scale(mut self, scale: AxisScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scale(&self) -> AxisScale {
        self.scale
    }

    pub fn nodes(&self) -> &[ParamPoint] {
        &self.nodes
    }

    /// Coefficients rounded to one double each.
    pub fn coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .zip(&self.coeffs_lo)
            .map(|(h, l)| h + l)
            .collect()
    }

    /// Jitter added to the diagonal during factorisation; zero for an exact solve.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn report(&self) -> &FitReport {
        &self.report
    }

    /// `‖ℒ̂‖²_H = αᵀKα`.
    pub fn rkhs_norm_squared(&self) -> f64 {
        let k = kernel_matrix(&self.nodes, self.gamma, self.scale);
        let mut acc = CompensatedSum::new();
        for i in 0..self.nodes.len() {
            let mut row = CompensatedSum::new();
            for j in 0..self.nodes.len() {
                row.add_prod(k[(i, j)], self.coeffs[j]);
                row.add_prod(k[(i, j)], self.coeffs_lo[j]);
            }
            let (h, l) = row.pair();
            acc.add_prod(self.coeffs[i], h);
            acc.add_prod(self.coeffs[i], l);
            acc.add_prod(self.coeffs_lo[i], h);
        }
        acc.value()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        check_gamma(s.gamma)?;
        check_nodes(&s.nodes)?;
        if s.coeffs.len() != s.nodes.len() || s.coeffs_lo.len() != s.nodes.len() {
            return Err(Error::Parse(
                "coefficient count does not match node count".into(),
            ));
        }
        Ok(s)
    }
}

/// Solves `K α = z` so that `ℒ̂` reproduces `values` at `nodes`.
///
/// The Cholesky factorisation is tried on `K` first and on `K + εI` with
/// `ε = 10⁻¹²·tr(K)/N, 10⁻¹¹·tr(K)/N, …, 10⁻⁶·tr(K)/N` only if it breaks down
/// or if compensated refinement cannot push the residual of that system below
/// `10⁻¹²·max|z|`. Nearly coincident nodes therefore show up as a nonzero
/// [`KernelSurrogate::jitter`] instead of as a silently inexact fit.
pub fn fit_interpolation(
    nodes: &[ParamPoint],
    values: &[f64],
    gamma: f64,
) -> Result<KernelSurrogate> {
    fit_ridge(nodes, values, gamma, 0.0, 0.0)
}

/// Kernel ridge regression, `(K + N·λ·s·I) α = z` with `s = noise_cov` when it is
/// positive and `s = 1` otherwise. `λ = 0` is the interpolation solve.
pub fn fit_ridge(
    nodes: &[ParamPoint],
    values: &[f64],
    gamma: f64,
    lambda: f64,
    noise_cov: f64,
) -> Result<KernelSurrogate> {
    fit_ridge_scaled(
        nodes,
        values,
        gamma,
        lambda,
        noise_cov,
        AxisScale::default(),
    )
}

/// [`fit_ridge`] with per-axis length units.
pub fn fit_ridge_scaled(
    nodes: &[ParamPoint],
    values: &[f64],
    gamma: f64,
    lambda: f64,
    noise_cov: f64,
    scale: AxisScale,
) -> Result<KernelSurrogate> {
    check_gamma(gamma)?;
    check_nodes(nodes)?;
    if !(lambda >= 0.0 && lambda.is_finite()) || !(noise_cov >= 0.0 && noise_cov.is_finite()) {
        return Err(Error::config(format!(
            "ridge parameters must be finite and nonnegative, got lambda = {lambda}, noise_cov = {noise_cov}"
        )));
    }
    if !(scale.w > 0.0 && scale.b > 0.0) {
        return Err(Error::config("axis scales must be positive"));
    }
    let n = nodes.len();
    if values.len() != n {
        return Err(Error::Dimension {
            context: "surrogate values",
            expected: n,
            got: values.len(),
        });
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            location: "surrogate value".into(),
            value: bad,
        });
    }

    let method = if lambda == 0.0 {
        FitMethod::Interpolation
    } else {
        FitMethod::Ridge { lambda, noise_cov }
    };
    let weight = if noise_cov > 0.0 { noise_cov } else { 1.0 };
    let regularization = n as f64 * lambda * weight;

    let mut system = kernel_matrix(nodes, gamma, scale);
    for i in 0..n {
        system[(i, i)] += regularization;
    }
    let kernel_lo = Matrix::from_fn(n, n, |i, j| {
        scaled_kernel_dd(nodes[i], nodes[j], gamma, scale).lo
    });
    let (hi, lo, steps, jitter) = solve_refined(&system, &kernel_lo, values)?;

    let mut surrogate = KernelSurrogate {
        gamma,
        scale,
        nodes: nodes.to_vec(),
        coeffs: hi,
        coeffs_lo: lo,
        jitter,
        report: FitReport {
            method,
            regularization,
            jitter,
            refinement_steps: steps,
            max_relative_residual: 0.0,
        },
    };
    surrogate.report.max_relative_residual = nodes
        .iter()
        .zip(values)
        .map(|(p, z)| (surrogate_eval(&surrogate, *p) - z).abs() / z.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(surrogate)
}

/// Factorises `system + jitter·I` for increasing jitter and refines the
/// solution. A level is accepted once refinement brings the residual below
/// `REFINED_RESIDUAL·max|z|`; a Cholesky breakdown or a stalled refinement
/// moves on to the next level.
fn solve_refined(
    system: &Matrix,
    kernel_lo: &Matrix,
    values: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, usize, f64)> {
    let n = system.nrows();
    let mean_diag = system.trace() / n as f64;
    let z_scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = REFINED_RESIDUAL * z_scale;
    let mut attempts = vec![0.0];
    attempts.extend((JITTER_FIRST..=JITTER_LAST).map(|e| 10f64.powi(e) * mean_diag));
    let z = Vector::from_column_slice(values);
    for jitter in attempts {
        let mut a = system.clone();
        for i in 0..n {
            a[(i, i)] += jitter;
        }
        let Some(chol) = a.clone().cholesky() else {
            continue;
        };
        let mut hi: Vec<f64> = chol.solve(&z).iter().copied().collect();
        let mut lo = vec![0.0; n];
        let mut best = (hi.clone(), lo.clone(), f64::INFINITY, 0);
        let mut previous = f64::INFINITY;
        for step in 0..=MAX_REFINEMENTS {
            let r = residual(&a, kernel_lo, values, &hi, &lo);
            let size = r.amax();
            if size < best.2 {
                best = (hi.clone(), lo.clone(), size, step);
            }
            if size == 0.0 || !(size <= 0.5 * previous) || step == MAX_REFINEMENTS {
                break;
            }
            previous = size;
            let delta = chol.solve(&r);
            for i in 0..n {
                let (s, e) = two_sum(hi[i], delta[i]);
                let (h, l) = two_sum(s, e + lo[i]);
                hi[i] = h;
                lo[i] = l;
            }
        }
        let (hi, lo, size, steps) = best;
        if size <= tolerance {
            return Ok((hi, lo, steps, jitter));
        }
    }
    let eig = system.symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
        (lo.min(v), hi.max(v.abs()))
    });
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Err(Error::IllConditioned { condition })
}

fn residual(system: &Matrix, kernel_lo: &Matrix, z: &[f64], hi: &[f64], lo: &[f64]) -> Vector {
    Vector::from_iterator(
        z.len(),
        (0..z.len()).map(|i| {
            let mut acc = Dd::from(z[i]);
            for j in 0..z.len() {
                let k = Dd::new(system[(i, j)], kernel_lo[(i, j)]);
                acc = acc + -(k * Dd::new(hi[j], lo[j]));
            }
            acc.to_f64()
        }),
    )
}

/// `Σₙ αₙ k(p, pₙ)`, accumulated in double-double and rounded once.
pub fn surrogate_eval(s: &KernelSurrogate, p: ParamPoint) -> f64 {
    let mut acc = Dd::ZERO;
    for ((node, h), l) in s.nodes.iter().zip(&s.coeffs).zip(&s.coeffs_lo) {
        acc = acc + Dd::new(*h, *l) * scaled_kernel_dd(p, *node, s.gamma, s.scale);
    }
    acc.to_f64()
}

/// `(∂ℒ̂/∂w, ∂ℒ̂/∂b) = Σₙ αₙ · (−(p − pₙ)/γ) · k(p, pₙ)`, in scaled units when
/// the surrogate carries an axis scale.
pub fn surrogate_grad(s: &KernelSurrogate, p: ParamPoint) -> [f64; 2] {
    let mut gw = Dd::ZERO;
    let mut gb = Dd::ZERO;
    for ((node, h), l) in s.nodes.iter().zip(&s.coeffs).zip(&s.coeffs_lo) {
        let ak = Dd::new(*h, *l) * scaled_kernel_dd(p, *node, s.gamma, s.scale);
        let sw = s.gamma * s.scale.w * s.scale.w;
        let sb = s.gamma * s.scale.b * s.scale.b;
        gw = gw + -(Dd::diff(p.w, node.w).div_f64(sw) * ak);
        gb = gb + -(Dd::diff(p.b, node.b).div_f64(sb) * ak);
    }
    [gw.to_f64(), gb.to_f64()]
}

/// Relative errors `|ℒ − ℒ̂| / |ℒ|` per grid point. Points with `|ℒ| < 1e-14`
/// are skipped and counted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorField {
    pub errors: Vec<Option<f64>>,
    pub min: f64,
    pub max: f64,
    pub skipped: usize,
}

pub fn relative_errors(
    s: &KernelSurrogate,
    grid: &[ParamPoint],
    truth: &[f64],
) -> Result<ErrorField> {
    if grid.len() != truth.len() {
        return Err(Error::Dimension {
            context: "truth values",
            expected: grid.len(),
            got: truth.len(),
        });
    }
    let errors: Vec<Option<f64>> = grid
        .par_iter()
        .zip(truth)
        .map(|(p, &t)| (t.abs() >= 1e-14).then(|| (t - surrogate_eval(s, *p)).abs() / t.abs()))
        .collect();
    let kept = errors.iter().flatten();
    let min = kept.clone().copied().fold(f64::INFINITY, f64::min);
    let max = kept.copied().fold(f64::NEG_INFINITY, f64::max);
    let skipped = errors.iter().filter(|e| e.is_none()).count();
    Ok(ErrorField {
        errors,
        min,
        max,
        skipped,
    })
}

pub fn relative_error_field<F>(s: &KernelSurrogate, truth: F, grid: &[ParamPoint]) -> ErrorField
where
    F: Fn(ParamPoint) -> f64 + Sync,
{
    let values: Vec<f64> = grid.par_iter().map(|p| truth(*p)).collect();
    relative_errors(s, grid, &values).expect("truth evaluated on every grid point")
}
