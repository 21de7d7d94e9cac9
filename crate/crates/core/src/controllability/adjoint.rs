use nalgebra::DVectorView;

use crate::dynamics::ControlSchedule;
use crate::{Error, Result, Vector};

/// Costates `λ(t_k) ∈ ℝ^{M·d}` on the schedule grid, particle blocks stacked.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointState {
    times: Vec<f64>,
    costates: Vec<Vector>,
    particles: usize,
    dim: usize,
}

impl AdjointState {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn costates(&self) -> &[Vector] {
        &self.costates
    }

    pub fn costate(&self, k: usize) -> &Vector {
        &self.costates[k]
    }

    /// `λᵢ(t_k)`.
    pub fn particle(&self, k: usize, i: usize) -> DVectorView<'_, f64> {
        self.costates[k].rows(i * self.dim, self.dim)
    }

    pub fn terminal(&self) -> &Vector {
        self.costates
            .last()
            .expect("adjoint has at least one grid point")
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σᵢ λᵢ(t_k)`, i.e. `Bᵀλ(t_k)`.
    pub fn particle_sum(&self, k: usize) -> Vector {
        let mut acc = Vector::zeros(self.dim);
        for i in 0..self.particles {
            acc += self.particle(k, i);
        }
        acc
    }
}

pub(crate) fn particle_count(len: usize, d: usize, context: &'static str) -> Result<usize> {
    if len == 0 || !len.is_multiple_of(d) {
        return Err(Error::Dimension {
            context,
            expected: d * (len / d).max(1),
            got: len,
        });
    }
    Ok(len / d)
}

/// Solves `λ' = -(I ⊗ w(t))ᵀ λ`, `λ(T) = λᵀ` backwards on the schedule grid.
///
/// The step `λ_k = (I + dt·w(t_k))ᵀ λ_{k+1}` is the transpose of the forward
/// Euler step, so the discrete state/costate pairing is preserved exactly.
pub fn adjoint_solve(schedule: &ControlSchedule, lambda_terminal: &Vector) -> Result<AdjointState> {
    let d = schedule.dim();
    let m = particle_count(lambda_terminal.len(), d, "terminal costate")?;
    let n = schedule.steps();
    let dt = schedule.dt();
    let mut costates = vec![Vector::zeros(m * d); n + 1];
    costates[n] = lambda_terminal.clone();
    for k in (0..n).rev() {
        let w = schedule.weight_at(schedule.time(k));
        let next = &costates[k + 1];
        let mut cur = next.clone();
        for i in 0..m {
            let block = next.rows(i * d, d);
            let mut out = cur.rows_mut(i * d, d);
            out.gemv_tr(dt, &w, &block, 1.0);
        }
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                time: schedule.time(k),
            });
        }
        costates[k] = cur;
    }
    Ok(AdjointState {
        times: schedule.times(),
        costates,
        particles: m,
        dim: d,
    })
}

/// Forward Euler for the stacked linear system `xᵢ' = w(t)xᵢ + b(t)` with a bias
/// given at every grid point. Returns the state at every grid point.
pub fn forward_linear(
    schedule: &ControlSchedule,
    x0: &Vector,
    bias: &[Vector],
) -> Result<Vec<Vector>> {
    let d = schedule.dim();
    let m = particle_count(x0.len(), d, "stacked initial state")?;
    let n = schedule.steps();
    if bias.len() != n + 1 {
        return Err(Error::Dimension {
            context: "bias trajectory length",
            expected: n + 1,
            got: bias.len(),
        });
    }
    if let Some(b) = bias.iter().find(|b| b.len() != d) {
        return Err(Error::Dimension {
            context: "bias vector",
            expected: d,
            got: b.len(),
        });
    }
    let dt = schedule.dt();
    let mut states = Vec::with_capacity(n + 1);
    states.push(x0.clone());
    for k in 0..n {
        let w = schedule.weight_at(schedule.time(k));
        let x = &states[k];
        let mut next = x.clone();
        for i in 0..m {
            let xi = x.rows(i * d, d);
            let mut out = next.rows_mut(i * d, d);
            out.gemv(dt, &w, &xi, 1.0);
            out.axpy(dt, &bias[k], 1.0);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                time: schedule.time(k + 1),
            });
        }
        states.push(next);
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    #[test]
    fn zero_generator_keeps_costate() {
        let s = ControlSchedule::constant(Matrix::zeros(2, 2), Vector::zeros(2), 0.0, 1.0, 0.1)
            .unwrap();
        let lt = Vector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let adj = adjoint_solve(&s, &lt).unwrap();
        assert_eq!(adj.particles(), 2);
        assert!(adj.costates().iter().all(|l| l == &lt));
    }

    #[test]
    fn zero_terminal_gives_zero_costate() {
        let s = ControlSchedule::scalar(0.7, 0.0, 0.0, 1.0, 0.01).unwrap();
        let adj = adjoint_solve(&s, &Vector::zeros(3)).unwrap();
        assert!(adj.costates().iter().all(|l| l.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn scalar_closed_form() {
        let (w, c) = (0.8, 1.3);
        let errs: Vec<f64> = [1e-2, 5e-3]
            .iter()
            .map(|&dt| {
                let s = ControlSchedule::scalar(w, 0.0, 0.0, 1.0, dt).unwrap();
                let adj = adjoint_solve(&s, &Vector::from_element(1, c)).unwrap();
                assert_eq!(adj.terminal()[0], c);
                adj.times()
                    .iter()
                    .zip(adj.costates())
                    .map(|(t, l)| (l[0] - c * (w * (1.0 - t)).exp()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] < 2e-2);
        assert!(errs[0] / errs[1] > 1.8, "first order expected: {errs:?}");
    }

    #[test]
    fn transpose_symmetry_for_homogeneous_flow() {
        // λ(t0)·x0 == x(T)·λᵀ for the zero-bias discrete flow (exact discrete adjoint).
        let w = Matrix::from_row_slice(2, 2, &[0.3, -0.7, 0.5, -0.2]);
        let s = ControlSchedule::constant(w, Vector::zeros(2), 0.0, 2.0, 1e-2).unwrap();
        let x0 = Vector::from_vec(vec![0.4, -1.1]);
        let lt = Vector::from_vec(vec![0.9, 0.25]);
        let xs = forward_linear(&s, &x0, &vec![Vector::zeros(2); s.steps() + 1]).unwrap();
        let adj = adjoint_solve(&s, &lt).unwrap();
        let lhs = adj.costate(0).dot(&x0);
        let rhs = xs.last().unwrap().dot(&lt);
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn rejects_ragged_costate() {
        let s = ControlSchedule::constant(Matrix::zeros(2, 2), Vector::zeros(2), 0.0, 1.0, 0.1)
            .unwrap();
        assert!(adjoint_solve(&s, &Vector::zeros(3)).is_err());
    }
}
