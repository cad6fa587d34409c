//! Scalar coefficient functions of the parameter vector.
//!
//! Every system matrix is an affine combination `f_1(mu) M_1 + ... + f_k(mu) M_k`
//! of constant matrices weighted by real-analytic scalar functions. The closed
//! set of variants below covers all coefficient shapes appearing in the
//! benchmark problems (constants, single coordinates, products of coordinates);
//! `Blackbox` is the extension point for anything else. Analyticity of a
//! blackbox coefficient cannot be verified and is the caller's obligation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A real scalar function of the parameter vector together with its gradient.
#[derive(Clone, Serialize, Deserialize)]
pub enum ScalarCoefficient {
    /// The constant function `mu -> c`.
    Constant(f64),
    /// The coordinate projection `mu -> mu[j]`.
    Coordinate(usize),
    /// `mu -> scale * prod_j mu[j]^exponents[j]`.
    Monomial { exponents: Vec<u32>, scale: f64 },
    /// User-supplied evaluation and gradient callbacks.
    #[serde(skip)]
    Blackbox {
        eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        grad: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    },
}

impl fmt::Debug for ScalarCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Coordinate(j) => write!(f, "Coordinate({j})"),
            Self::Monomial { exponents, scale } => {
                write!(f, "Monomial {{ exponents: {exponents:?}, scale: {scale} }}")
            }
            Self::Blackbox { .. } => write!(f, "Blackbox {{ .. }}"),
        }
    }
}

impl ScalarCoefficient {
    /// Product of two coordinates, e.g. the `c * v` coefficient of the
    /// three-parameter anemometer model.
    pub fn coordinate_product(i: usize, j: usize, d: usize) -> Self {
        let mut exponents = vec![0u32; d];
        exponents[i] += 1;
        exponents[j] += 1;
        Self::Monomial {
            exponents,
            scale: 1.0,
        }
    }

    /// Evaluates the coefficient at `mu`.
    pub fn eval(&self, mu: &[f64]) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Coordinate(j) => mu[*j],
            Self::Monomial { exponents, scale } => {
                let mut value = *scale;
                for (j, &e) in exponents.iter().enumerate() {
                    if e > 0 {
                        value *= mu[j].powi(e as i32);
                    }
                }
                value
            }
            Self::Blackbox { eval, .. } => eval(mu),
        }
    }

    /// The partial derivative with respect to `mu[j]`.
    pub fn partial(&self, mu: &[f64], j: usize) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Coordinate(i) => {
                if *i == j {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Monomial { exponents, scale } => {
                let ej = exponents.get(j).copied().unwrap_or(0);
                if ej == 0 {
                    return 0.0;
                }
                let mut value = *scale * f64::from(ej);
                for (i, &e) in exponents.iter().enumerate() {
                    let e = if i == j { e - 1 } else { e };
                    if e > 0 {
                        value *= mu[i].powi(e as i32);
                    }
                }
                value
            }
            Self::Blackbox { grad, .. } => grad(mu)[j],
        }
    }

    /// The full gradient at `mu`.
    pub fn grad(&self, mu: &[f64]) -> Vec<f64> {
        match self {
            Self::Blackbox { grad, .. } => grad(mu),
            _ => (0..mu.len()).map(|j| self.partial(mu, j)).collect(),
        }
    }

    /// Largest parameter index the coefficient reads, if any. Used to
    /// validate that a system's coefficients fit its parameter count.
    pub fn max_coordinate(&self) -> Option<usize> {
        match self {
            Self::Constant(_) => None,
            Self::Coordinate(j) => Some(*j),
            Self::Monomial { exponents, .. } => exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, _)| j)
                .max(),
            Self::Blackbox { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_zero_gradient() {
        let c = ScalarCoefficient::Constant(3.5);
        assert_eq!(c.eval(&[1.0, 2.0]), 3.5);
        assert_eq!(c.grad(&[1.0, 2.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn coordinate_gradient_is_unit_vector() {
        let c = ScalarCoefficient::Coordinate(1);
        assert_eq!(c.eval(&[4.0, 5.0, 6.0]), 5.0);
        assert_eq!(c.grad(&[4.0, 5.0, 6.0]), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn monomial_matches_analytic_derivative() {
        // f(mu) = 2 * mu0^2 * mu2
        let c = ScalarCoefficient::Monomial {
            exponents: vec![2, 0, 1],
            scale: 2.0,
        };
        let mu = [3.0, 7.0, 5.0];
        assert_eq!(c.eval(&mu), 2.0 * 9.0 * 5.0);
        assert_eq!(c.partial(&mu, 0), 2.0 * 2.0 * 3.0 * 5.0);
        assert_eq!(c.partial(&mu, 1), 0.0);
        assert_eq!(c.partial(&mu, 2), 2.0 * 9.0);
    }

    #[test]
    fn monomial_partial_at_zero_base() {
        // f(mu) = mu0^2: derivative 2*mu0 vanishes at 0 without NaN.
        let c = ScalarCoefficient::Monomial {
            exponents: vec![2],
            scale: 1.0,
        };
        assert_eq!(c.partial(&[0.0], 0), 0.0);
        // f(mu) = mu0: derivative 1 at 0.
        let c = ScalarCoefficient::Monomial {
            exponents: vec![1],
            scale: 1.0,
        };
        assert_eq!(c.partial(&[0.0], 0), 1.0);
    }

    #[test]
    fn blackbox_roundtrip() {
        let c = ScalarCoefficient::Blackbox {
            eval: Arc::new(|mu: &[f64]| mu[0].sin()),
            grad: Arc::new(|mu: &[f64]| vec![mu[0].cos()]),
        };
        let mu = [0.3];
        assert!((c.eval(&mu) - 0.3f64.sin()).abs() < 1e-15);
        assert!((c.grad(&mu)[0] - 0.3f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn coordinate_product_builds_bilinear_monomial() {
        let c = ScalarCoefficient::coordinate_product(0, 2, 3);
        assert_eq!(c.eval(&[2.0, 9.0, 5.0]), 10.0);
        assert_eq!(c.grad(&[2.0, 9.0, 5.0]), vec![5.0, 0.0, 2.0]);
    }
}
