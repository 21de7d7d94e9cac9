//! Double-double numbers: an unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`,
//! giving roughly 106 bits of precision. Only the operations the kernel
//! expansion needs are provided.

use std::ops::{Add, Mul, Neg};

use super::compensated::{two_prod, two_sum};

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

/// Argument halvings before the Taylor series in [`Dd::exp`].
const EXP_HALVINGS: i32 = 10;
const EXP_TERMS: u32 = 10;

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    /// `a − b` without rounding.
    pub fn diff(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, -b);
        Self { hi, lo }
    }

    pub fn square(self) -> Self {
        self * self
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, pe) = two_prod(q1, b);
        let (s, e) = two_sum(self.hi, -p);
        let e = e - pe + self.lo;
        let q2 = (s + e) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }

    /// Multiplication by `2^k`, exact away from the subnormal range.
    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Self {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    /// `e^x` to about 32 significant digits; flushes to zero below `e^-745`.
    pub fn exp(self) -> Self {
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        if self.hi == 0.0 {
            return Self { hi: 1.0, lo: 0.0 };
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self + (-LN2.mul_f64(k))).ldexp(-EXP_HALVINGS);
        // expm1 of the reduced argument, then e^{2x} − 1 = s(s + 2) per halving
        let mut term = r;
        let mut s = r;
        for n in 2..=EXP_TERMS {
            term = (term * r).div_f64(n as f64);
            s = s + term;
        }
        for _ in 0..EXP_HALVINGS {
            s = s * (s + Dd { hi: 2.0, lo: 0.0 });
        }
        let one_plus = s + Dd { hi: 1.0, lo: 0.0 };
        let k = k as i32;
        if k < -1000 {
            one_plus.ldexp(-1000).ldexp(k + 1000)
        } else {
            one_plus.ldexp(k)
        }
    }

    /// Nearest double to `hi + lo`.
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }
}

impl Add for Dd {
    type Output = Dd;

    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Mul for Dd {
    type Output = Dd;

    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_reference_values() {
        let e = Dd::from(1.0).exp();
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.4456468917292502e-16).abs() < 1e-31);
        assert_eq!(Dd::from(0.0).exp(), Dd::from(1.0));
        let two = LN2.exp();
        assert_eq!(two.hi, 2.0);
        assert!(two.lo.abs() < 1e-30);
    }

    #[test]
    fn exp_of_opposite_arguments_multiplies_to_one() {
        for x in [-600.0, -37.5, -6.25, -1e-3, 1e-9, 0.3, 12.0, 300.0] {
            let x = Dd::new(x, x * 1e-18);
            let one = x.exp() * (-x).exp();
            assert!((one.hi - 1.0 + one.lo).abs() < 1e-29, "x = {x:?}: {one:?}");
        }
    }

    #[test]
    fn exp_agrees_with_libm() {
        for i in 0..200 {
            let x = -8.0 + 0.0731 * i as f64;
            let ours = Dd::from(x).exp().to_f64();
            let libm = x.exp();
            assert!((ours - libm).abs() <= 2.0 * f64::EPSILON * libm, "{x}");
        }
        assert_eq!(Dd::from(-800.0).exp(), Dd::ZERO);
    }

    #[test]
    fn division_and_products() {
        let third = Dd::from(1.0).div_f64(3.0);
        let back = third.mul_f64(3.0);
        assert_eq!(back.hi, 1.0);
        assert!(back.lo.abs() < 1e-32);
        let d = Dd::diff(1.0, 1e-20);
        assert_eq!((d.hi, d.lo), (1.0, -1e-20));
        assert_eq!(d.square().hi, 1.0);
    }
}
