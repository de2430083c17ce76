//! Named problems used by the configs, tests and verification suites.

use crate::herglotz::{BoundaryObject, RationalHN};
use crate::potential::Potential;
use crate::problem::Problem;

/// `q = 0` with Dirichlet conditions at both ends: `lambda_n = (n + 1)^2`.
pub fn dirichlet_zero() -> Problem {
    Problem::new(Potential::zero(), BoundaryObject::Inf(0), BoundaryObject::Inf(0))
}

/// `q = 0` with Neumann conditions at both ends: `lambda_n = n^2`.
pub fn neumann_zero() -> Problem {
    Problem::new(Potential::zero(), BoundaryObject::neumann(), BoundaryObject::neumann())
}

/// `2/x^2` singularity on the left, Dirichlet on the right: `pi sqrt(lambda_n)`
/// are the positive roots of `tan s = s`.
pub fn bessel_l1() -> Problem {
    Problem::new(Potential::zero(), BoundaryObject::Inf(1), BoundaryObject::Inf(0))
}

/// `f = 1/2 + 1/(3 - lambda)` (index 2) on the left, Dirichlet on the right.
pub fn pole_left() -> Problem {
    let f = RationalHN::new(0.0, 0.5, vec![3.0], vec![1.0]).expect("valid coefficients");
    Problem::new(Potential::zero(), BoundaryObject::Hn(f), BoundaryObject::Inf(0))
}

/// `q = x`, `2/x^2` singularity on the left, `F = lambda` on the right.
pub fn singular_affine() -> Problem {
    let big_f = RationalHN::affine(1.0, 0.0).expect("valid coefficients");
    Problem::new(
        Potential::polynomial(vec![0.0, 1.0]),
        BoundaryObject::Inf(1),
        BoundaryObject::Hn(big_f),
    )
}

/// `q = cos 2x` with Robin constants `1` and `-1/2`.
pub fn robin_cos() -> Problem {
    Problem::new(
        Potential::cosine(1.0, 2.0),
        BoundaryObject::robin(1.0),
        BoundaryObject::robin(-0.5),
    )
}

/// `q = cos x` with Dirichlet conditions; not symmetric about `pi/2`.
pub fn dirichlet_cos() -> Problem {
    Problem::new(Potential::cosine(1.0, 1.0), BoundaryObject::Inf(0), BoundaryObject::Inf(0))
}

/// `q = 0`, `6/x^2` on the left and `2/(pi - x)^2` on the right.
pub fn double_singular() -> Problem {
    Problem::new(Potential::zero(), BoundaryObject::Inf(2), BoundaryObject::Inf(1))
}

/// `f = lambda + 1 + 1/(2 - lambda)` (index 3), `F = -1 + 2/(5 - lambda)`
/// (index 2) and `q = x^2 / 4`.
pub fn two_sided_poles() -> Problem {
    let f = RationalHN::new(1.0, 1.0, vec![2.0], vec![1.0]).expect("valid coefficients");
    let big_f = RationalHN::new(0.0, -1.0, vec![5.0], vec![2.0]).expect("valid coefficients");
    Problem::new(
        Potential::polynomial(vec![0.0, 0.0, 0.25]),
        BoundaryObject::Hn(f),
        BoundaryObject::Hn(big_f),
    )
}

pub fn by_name(name: &str) -> Option<Problem> {
    all().into_iter().find(|(n, _)| *n == name).map(|(_, p)| p)
}

pub fn all() -> Vec<(&'static str, Problem)> {
    vec![
        ("dirichlet_zero", dirichlet_zero()),
        ("neumann_zero", neumann_zero()),
        ("bessel_l1", bessel_l1()),
        ("pole_left", pole_left()),
        ("singular_affine", singular_affine()),
        ("robin_cos", robin_cos()),
        ("dirichlet_cos", dirichlet_cos()),
        ("double_singular", double_singular()),
        ("two_sided_poles", two_sided_poles()),
    ]
}
