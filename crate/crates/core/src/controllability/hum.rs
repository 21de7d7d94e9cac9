use nalgebra::DMatrix;
use rayon::prelude::*;

use super::adjoint::{adjoint_solve, forward_linear, particle_count, AdjointState};
use crate::dynamics::ControlSchedule;
use crate::{Error, Result, Vector};

/// Gramians with a larger condition estimate are treated as singular.
pub const MAX_GRAMIAN_CONDITION: f64 = 1e10;

/// Bias control `b(t_k) = Σᵢ λᵢ(t_k)` on the adjoint grid.
pub fn hum_bias(adjoint: &AdjointState) -> Vec<Vector> {
    (0..adjoint.times().len())
        .map(|k| adjoint.particle_sum(k))
        .collect()
}

/// Both sides of the state/costate duality identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityPairing {
    /// `x(T)·λᵀ` for the state driven from zero by the bias.
    pub terminal: f64,
    /// Trapezoid quadrature of `∫ b(t)·Σᵢλᵢ(t) dt` on the schedule grid.
    pub quadrature: f64,
}

impl DualityPairing {
    pub fn gap(&self) -> f64 {
        (self.terminal - self.quadrature).abs()
    }

    /// Gap relative to the larger of the two sides (zero when both vanish).
    pub fn relative_gap(&self) -> f64 {
        let scale = self.terminal.abs().max(self.quadrature.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.gap() / scale
        }
    }
}

pub fn duality_pairing(
    schedule: &ControlSchedule,
    bias: &[Vector],
    lambda_terminal: &Vector,
) -> Result<DualityPairing> {
    let adjoint = adjoint_solve(schedule, lambda_terminal)?;
    let x0 = Vector::zeros(lambda_terminal.len());
    let states = forward_linear(schedule, &x0, bias)?;
    let terminal = states
        .last()
        .expect("non-empty trajectory")
        .dot(lambda_terminal);
    let integrand: Vec<f64> = (0..bias.len())
        .map(|k| bias[k].dot(&adjoint.particle_sum(k)))
        .collect();
    let times = adjoint.times();
    let quadrature = integrand
        .windows(2)
        .zip(times.windows(2))
        .map(|(f, t)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum();
    Ok(DualityPairing {
        terminal,
        quadrature,
    })
}

/// `|x(T)·λᵀ − ∫ b·Σᵢλᵢ dt|` with `x(t0) = 0` and identity activation.
pub fn duality_gap(
    schedule: &ControlSchedule,
    bias: &[Vector],
    lambda_terminal: &Vector,
) -> Result<f64> {
    duality_pairing(schedule, bias, lambda_terminal).map(|p| p.gap())
}

#[derive(Clone, Debug)]
pub struct HumSolution {
    pub lambda_terminal: Vector,
    pub bias: Vec<Vector>,
    pub adjoint: AdjointState,
    /// Ratio of extreme singular values of the assembled Gramian.
    pub gramian_condition: f64,
}

/// Map `λᵀ ↦ x(T)` for the state driven from zero by `b = Σᵢ λᵢ`.
fn gamma_map(schedule: &ControlSchedule, lambda_terminal: &Vector) -> Result<Vector> {
    let adjoint = adjoint_solve(schedule, lambda_terminal)?;
    let bias = hum_bias(&adjoint);
    let states = forward_linear(schedule, &Vector::zeros(lambda_terminal.len()), &bias)?;
    Ok(states.last().expect("non-empty trajectory").clone())
}

/// Finds the terminal costate whose bias `Σᵢ λᵢ(t)` steers `x0` to `y`
/// (identity activation). The Gramian of the linear map `λᵀ ↦ x(T)` is
/// assembled column by column from unit probes and solved directly.
pub fn hum_solve_terminal(
    schedule: &ControlSchedule,
    x0: &Vector,
    y: &Vector,
) -> Result<HumSolution> {
    let d = schedule.dim();
    let m = particle_count(x0.len(), d, "stacked initial state")?;
    if y.len() != x0.len() {
        return Err(Error::Dimension {
            context: "stacked target",
            expected: x0.len(),
            got: y.len(),
        });
    }
    let n = m * d;
    let zero_bias = vec![Vector::zeros(d); schedule.steps() + 1];
    let free = forward_linear(schedule, x0, &zero_bias)?;
    let rhs = y - free.last().expect("non-empty trajectory");

    let columns: Vec<Vector> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut probe = Vector::zeros(n);
            probe[j] = 1.0;
            gamma_map(schedule, &probe)
        })
        .collect::<Result<_>>()?;
    let gramian = DMatrix::from_columns(&columns);

    let svd = gramian.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_GRAMIAN_CONDITION) {
        return Err(Error::Uncontrollable { condition });
    }
    let lambda_terminal = svd
        .solve(&rhs, 0.0)
        .map_err(|_| Error::Uncontrollable { condition })?;
    let adjoint = adjoint_solve(schedule, &lambda_terminal)?;
    let bias = hum_bias(&adjoint);
    Ok(HumSolution {
        lambda_terminal,
        bias,
        adjoint,
        gramian_condition: condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    fn scalar_schedule(w: f64, dt: f64) -> ControlSchedule {
        ControlSchedule::scalar(w, 0.0, 0.0, 1.0, dt).unwrap()
    }

    #[test]
    fn bias_sums_particle_costates() {
        let s = scalar_schedule(0.0, 0.1);
        let adj = adjoint_solve(&s, &Vector::from_vec(vec![1.0, 2.0])).unwrap();
        assert!(hum_bias(&adj).iter().all(|b| b[0] == 3.0));
        let adj = adjoint_solve(&s, &Vector::from_vec(vec![1.5])).unwrap();
        assert!(hum_bias(&adj).iter().all(|b| b[0] == 1.5));
        let adj = adjoint_solve(&s, &Vector::from_vec(vec![1.0, -1.0])).unwrap();
        assert!(hum_bias(&adj).iter().all(|b| b[0] == 0.0));
    }

    #[test]
    fn zero_costate_has_zero_gap() {
        let s = scalar_schedule(0.4, 0.01);
        let bias = vec![Vector::from_element(1, 0.3); s.steps() + 1];
        assert_eq!(duality_gap(&s, &bias, &Vector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn constant_costate_pairing_is_exact() {
        let c = 1.7;
        let s = scalar_schedule(0.0, 1e-2);
        let adj = adjoint_solve(&s, &Vector::from_element(1, c)).unwrap();
        let p = duality_pairing(&s, &hum_bias(&adj), &Vector::from_element(1, c)).unwrap();
        assert!((p.terminal - c * c).abs() < 1e-12);
        assert!(p.gap() <= 1e-10 * c * c);
    }

    #[test]
    fn two_particle_gap_is_small() {
        let s = scalar_schedule(0.1, 1e-3);
        let lt = Vector::from_vec(vec![0.63, -0.21]);
        let adj = adjoint_solve(&s, &lt).unwrap();
        let p = duality_pairing(&s, &hum_bias(&adj), &lt).unwrap();
        assert!(p.relative_gap() <= 1e-4, "{p:?}");
    }

    #[test]
    fn reachable_target_needs_no_control() {
        let s = scalar_schedule(0.5, 1e-2);
        let x0 = Vector::from_element(1, 0.8);
        let free = forward_linear(&s, &x0, &vec![Vector::zeros(1); s.steps() + 1]).unwrap();
        let sol = hum_solve_terminal(&s, &x0, free.last().unwrap()).unwrap();
        assert!(sol.lambda_terminal[0].abs() < 1e-14);
        assert!(sol.bias.iter().all(|b| b[0].abs() < 1e-14));
    }

    #[test]
    fn unit_gramian_example() {
        let s = scalar_schedule(0.0, 1e-2);
        let sol = hum_solve_terminal(&s, &Vector::zeros(1), &Vector::from_element(1, 1.0)).unwrap();
        assert!((sol.lambda_terminal[0] - 1.0).abs() < 1e-12);
        assert!(sol.bias.iter().all(|b| (b[0] - 1.0).abs() < 1e-12));
        let xs = forward_linear(&s, &Vector::zeros(1), &sol.bias).unwrap();
        assert!((xs.last().unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shared_bias_cannot_split_identical_particles() {
        let s = scalar_schedule(0.0, 1e-2);
        let err = hum_solve_terminal(&s, &Vector::zeros(2), &Vector::from_vec(vec![1.0, 2.0]));
        match err {
            Err(Error::Uncontrollable { condition }) => assert!(condition > MAX_GRAMIAN_CONDITION),
            other => panic!("expected controllability failure, got {other:?}"),
        }
    }

    #[test]
    fn matrix_weights_reach_target() {
        let w = Matrix::from_row_slice(2, 2, &[0.2, -0.9, 0.4, -0.3]);
        let s = ControlSchedule::constant(w, Vector::zeros(2), 0.0, 1.0, 1e-3).unwrap();
        let x0 = Vector::from_vec(vec![1.0, -0.5]);
        let y = Vector::from_vec(vec![-0.3, 2.0]);
        let sol = hum_solve_terminal(&s, &x0, &y).unwrap();
        let xs = forward_linear(&s, &x0, &sol.bias).unwrap();
        assert!((xs.last().unwrap() - &y).norm() < 1e-10);
    }
}
