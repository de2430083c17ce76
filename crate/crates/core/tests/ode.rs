mod common;

use common::rel_err;
use dspec_core::ode::{char_function, char_function_at, char_derivative, left_regular, right_regular};
use dspec_core::{presets, BoundaryObject, Potential, Problem, SolverOptions};
use proptest::prelude::*;
use std::f64::consts::PI;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn right_solutions_mirror_left_ones() {
    let dd = presets::dirichlet_zero();
    let t = right_regular(&dd, 0.0, &[PI / 2.0], &opts()).unwrap();
    assert!((t.value(0) - PI / 2.0).abs() < 1e-8);

    let p = Problem::new(Potential::zero(), BoundaryObject::Inf(0), BoundaryObject::Inf(1));
    let t = right_regular(&p, 0.0, &[1.0, 2.0], &opts()).unwrap();
    for (i, x) in [1.0f64, 2.0].iter().enumerate() {
        assert!(rel_err(t.value(i), (PI - x).powi(2) / 3.0) < 1e-6);
    }

    let nn = presets::neumann_zero();
    let grid = [0.3, 1.2, 2.9];
    let t = right_regular(&nn, 1.0, &grid, &opts()).unwrap();
    for (i, x) in grid.iter().enumerate() {
        assert!((t.value(i) - (x - PI).cos()).abs() < 1e-8);
    }
}

#[test]
fn sine_characteristic_function() {
    let dd = presets::dirichlet_zero();
    for &l in &[0.25f64, 2.0, 7.3, -3.0] {
        let s = l.abs().sqrt();
        let exact = if l > 0.0 { -(s * PI).sin() / s } else { -(s * PI).sinh() / s };
        let got = char_function(&dd, l, &opts()).unwrap().value();
        assert!((got - exact).abs() <= 1e-8 * exact.abs().max(1.0), "{l}: {got} vs {exact}");
    }
    assert!(char_function(&dd, 1.0, &opts()).unwrap().value().abs() < 1e-8);
    let nn = char_function(&presets::neumann_zero(), 0.25, &opts()).unwrap().value();
    assert!((nn - 0.5).abs() < 1e-8);
    let d = char_derivative(&dd, 4.0, &opts()).unwrap().value();
    assert!((d + PI / 8.0).abs() < 1e-6);
}

#[test]
fn singular_log_derivative_approaches_frobenius_exponent() {
    for (p, m) in [(presets::bessel_l1(), 2.0), (presets::double_singular(), 3.0)] {
        let errs: Vec<f64> = [1e-2, 1e-3]
            .iter()
            .map(|&x| {
                let t = left_regular(&p, -1.0, &[x], &opts()).unwrap();
                (t.log_derivative(0) - m / x).abs()
            })
            .collect();
        // the leading correction is O(x): the error shrinks about tenfold
        assert!(errs[1] < errs[0] / 5.0, "{errs:?}");
        assert!(errs[1] < 1e-2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wronskian_is_position_independent(idx in 0usize..9, lambda in -20.0f64..60.0) {
        let (_, p) = presets::all().swap_remove(idx);
        let at = |x: f64| char_function_at(&p, lambda, x, &opts()).unwrap().value();
        let mid = at(PI / 2.0);
        prop_assume!(mid.abs() > 1e-6);
        for x in [PI / 4.0, 3.0 * PI / 4.0] {
            prop_assert!(rel_err(at(x), mid) <= 1e-7, "x = {}: {} vs {}", x, at(x), mid);
        }
    }
}
