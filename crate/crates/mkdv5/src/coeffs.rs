//! Equation coefficients, phase parameters and the structural assumptions on them.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::scalar::{rational_from_f64, Scalar};

/// Coefficients (alpha, beta, gamma, delta) of
/// `u_t + u_xxxxx + alpha u_x^3 + beta (u u_x^2)_x + gamma (u (u^2)_xx)_x + 6 delta (u^5)_x = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationCoefficients<T = f64> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl EquationCoefficients<f64> {
    pub const fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Self { alpha, beta, gamma, delta }
    }

    /// The completely integrable normalization (0, 0, 5, 1).
    pub const fn integrable() -> Self {
        Self::new(0.0, 0.0, 5.0, 1.0)
    }

    pub fn is_finite(&self) -> bool {
        [self.alpha, self.beta, self.gamma, self.delta].iter().all(|v| v.is_finite())
    }

    /// True when every cubic and quintic coefficient vanishes.
    pub fn is_linear(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0 && self.gamma == 0.0 && self.delta == 0.0
    }

    /// Exact rational copy (binary expansion of each double).
    pub fn to_exact(&self) -> EquationCoefficients<BigRational> {
        let c = |x: f64| rational_from_f64(x).expect("finite coefficient");
        EquationCoefficients {
            alpha: c(self.alpha),
            beta: c(self.beta),
            gamma: c(self.gamma),
            delta: c(self.delta),
        }
    }
}

impl<T: Scalar> EquationCoefficients<T> {
    pub fn to_f64(&self) -> EquationCoefficients<f64> {
        EquationCoefficients {
            alpha: self.alpha.as_f64(),
            beta: self.beta.as_f64(),
            gamma: self.gamma.as_f64(),
            delta: self.delta.as_f64(),
        }
    }

    pub fn from_ints(alpha: i64, beta: i64, gamma: i64, delta: i64) -> Self {
        Self {
            alpha: T::from_i64(alpha),
            beta: T::from_i64(beta),
            gamma: T::from_i64(gamma),
            delta: T::from_i64(delta),
        }
    }
}

/// `(gamma, e1)` with `e1 = E1(initial data)`; fixes the dispersion symbol
/// `P(k) = -k^5 + 2 gamma e1 k^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams<T = f64> {
    pub gamma: T,
    pub e1: T,
}

impl PhaseParams<f64> {
    pub fn new(gamma: f64, e1: f64) -> Self {
        assert!(e1 >= 0.0, "e1 must be nonnegative");
        Self { gamma, e1 }
    }

    pub fn to_exact(&self) -> PhaseParams<BigRational> {
        PhaseParams {
            gamma: rational_from_f64(self.gamma).expect("finite gamma"),
            e1: rational_from_f64(self.e1).expect("finite e1"),
        }
    }
}

impl<T: Scalar> PhaseParams<T> {
    /// `2 gamma e1`, the cubic coefficient of the symbol.
    pub fn cubic(&self) -> T {
        T::from_i64(2) * self.gamma.clone() * self.e1.clone()
    }

    /// Phase with no cubic renormalization.
    pub fn free() -> Self {
        Self { gamma: T::zero(), e1: T::zero() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionFlags {
    /// `alpha = 0`
    pub a0: bool,
    /// `alpha = beta`
    pub a1: bool,
    /// `(alpha - 3 beta + 6 gamma)(beta + 3 gamma) = 450 delta`
    pub a2: bool,
}

/// Default tolerance for the quadratic relation between coefficients.
pub fn default_a2_tol(c: &EquationCoefficients) -> f64 {
    1e-12 * (450.0 * c.delta).abs().max(1.0)
}

pub fn check_assumptions(c: &EquationCoefficients, tol: f64) -> AssumptionFlags {
    let a2_lhs = (c.alpha - 3.0 * c.beta + 6.0 * c.gamma) * (c.beta + 3.0 * c.gamma);
    AssumptionFlags {
        a0: c.alpha == 0.0,
        a1: c.alpha == c.beta,
        a2: (a2_lhs - 450.0 * c.delta).abs() <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrable_case_satisfies_all() {
        let c = EquationCoefficients::integrable();
        let f = check_assumptions(&c, default_a2_tol(&c));
        assert_eq!(f, AssumptionFlags { a0: true, a1: true, a2: true });
    }

    #[test]
    fn alpha_equals_beta_only() {
        let c = EquationCoefficients::new(1.0, 1.0, 0.0, 0.0);
        let f = check_assumptions(&c, default_a2_tol(&c));
        assert_eq!(f, AssumptionFlags { a0: false, a1: true, a2: false });
    }

    #[test]
    fn zero_coefficients() {
        let c = EquationCoefficients::new(0.0, 0.0, 0.0, 0.0);
        let f = check_assumptions(&c, default_a2_tol(&c));
        assert_eq!(f, AssumptionFlags { a0: true, a1: true, a2: true });
    }

    #[test]
    fn cubic_symbol_coefficient() {
        let p = PhaseParams::new(5.0, 2.0);
        assert_eq!(p.cubic(), 20.0);
    }
}
