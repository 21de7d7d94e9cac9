use serde::{Deserialize, Serialize};

use super::dd::Dd;
use crate::Matrix;

/// A weight/bias pair `(w, b)` for one-dimensional states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub w: f64,
    pub b: f64,
}

impl ParamPoint {
    pub fn new(w: f64, b: f64) -> Self {
        Self { w, b }
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.b.is_finite()
    }
}

/// Per-axis length units dividing `(w, b)` before distances are taken. The
/// default leaves both axes unscaled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisScale {
    pub w: f64,
    pub b: f64,
}

impl Default for AxisScale {
    fn default() -> Self {
        Self { w: 1.0, b: 1.0 }
    }
}

/// `exp(−‖p − q‖² / 2γ)` with the Euclidean norm on `(w, b)`.
pub fn kernel_eval(p: ParamPoint, q: ParamPoint, gamma: f64) -> f64 {
    scaled_kernel(p, q, gamma, AxisScale::default())
}

pub(crate) fn scaled_kernel(p: ParamPoint, q: ParamPoint, gamma: f64, scale: AxisScale) -> f64 {
    scaled_kernel_dd(p, q, gamma, scale).to_f64()
}

/// Kernel value in double-double precision. The expansion coefficients can be
/// many orders of magnitude larger than the surrogate values, so the kernel
/// has to be known well beyond one ulp for sums and differences of the
/// surrogate to be meaningful.
pub(crate) fn scaled_kernel_dd(p: ParamPoint, q: ParamPoint, gamma: f64, scale: AxisScale) -> Dd {
    let dw = Dd::diff(p.w, q.w).div_f64(scale.w);
    let db = Dd::diff(p.b, q.b).div_f64(scale.b);
    (-(dw.square() + db.square()).div_f64(2.0 * gamma)).exp()
}

/// Gram matrix `K_mn = k(p_m, p_n)`, exactly symmetric.
pub fn kernel_matrix(nodes: &[ParamPoint], gamma: f64, scale: AxisScale) -> Matrix {
    let n = nodes.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in 0..i {
            let v = scaled_kernel(nodes[i], nodes[j], gamma, scale);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}
