use crate::error::{Error, Result};
use crate::herglotz::BoundaryObject;
use crate::potential::Potential;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The boundary value problem
/// `-y'' + (lf (lf + 1) / x^2 + lF (lF + 1) / (pi - x)^2 + q) y = lambda y`
/// with boundary objects `f` (left) and `F` (right).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub q: Potential,
    #[serde(rename = "f")]
    pub left: BoundaryObject,
    #[serde(rename = "F")]
    pub right: BoundaryObject,
}

impl Problem {
    pub fn new(q: Potential, left: BoundaryObject, right: BoundaryObject) -> Self {
        Problem { q, left, right }
    }

    /// The singular part of the potential at `x`.
    pub fn singular_part(&self, x: f64) -> f64 {
        let lf = self.left.ell() as f64;
        let lr = self.right.ell() as f64;
        let mut s = 0.0;
        if lf > 0.0 {
            s += lf * (lf + 1.0) / (x * x);
        }
        if lr > 0.0 {
            s += lr * (lr + 1.0) / ((PI - x) * (PI - x));
        }
        s
    }

    pub fn full_potential(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < PI) {
            return Err(Error::OutOfDomain { x });
        }
        Ok(self.q.value(x) + self.singular_part(x))
    }

    /// `L = (ind f + ind F) / 2`.
    pub fn half_index_sum(&self) -> f64 {
        (self.left.index() + self.right.index()) as f64 / 2.0
    }

    /// `(1/2) int q + omega_1 + Omega_1`.
    pub fn sigma(&self) -> f64 {
        0.5 * self.q.integral() + self.left.omega().0 + self.right.omega().0
    }

    /// Whether the problem is its own mirror image: `F = f` and `q` symmetric.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.left.approx_eq(&self.right, tol) && self.q.symmetrize_check(tol)
    }
}
