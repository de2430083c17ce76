mod common;

use common::{rel_err, tan_root};
use dspec_core::ode::{char_derivative, char_function};
use dspec_core::spectrum::{
    beta, eigenvalues, norming_integral_check, product_representation_check, spectral_data,
};
use dspec_core::{presets, BoundaryObject, Potential, Problem, SolverOptions};
use std::f64::consts::PI;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn closed_form_spectra() {
    let d = spectral_data(&presets::dirichlet_zero(), 8, &opts()).unwrap();
    for n in 0..8 {
        let k = (n + 1) as f64;
        assert!((d.lambdas[n] - k * k).abs() < 1e-8);
        assert!(rel_err(d.gammas[n], PI / (2.0 * k * k)) < 1e-6);
        assert!((d.betas[n] - if n % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-6);
    }
    let d = spectral_data(&presets::neumann_zero(), 3, &opts()).unwrap();
    for (n, want) in [0.0, 1.0, 4.0].iter().enumerate() {
        assert!((d.lambdas[n] - want).abs() < 1e-8);
    }
    assert!((d.gammas[0] - PI).abs() < 1e-6);
    assert!((d.gammas[1] - PI / 2.0).abs() < 1e-6);
}

#[test]
fn bessel_spectrum_matches_tan_roots() {
    let l = eigenvalues(&presets::bessel_l1(), 6, &opts()).unwrap();
    for (n, lam) in l.iter().enumerate() {
        assert!(rel_err(lam.sqrt() * PI, tan_root(n + 1)) < 1e-7);
    }
}

#[test]
fn derivative_factors_into_beta_gamma() {
    for (name, p) in presets::all() {
        let d = spectral_data(&p, 8, &opts()).unwrap();
        assert!(d.lambdas.windows(2).all(|w| w[0] < w[1]), "{name}");
        for n in 0..d.len() {
            assert!(d.gammas[n] > 0.0 && d.betas[n] != 0.0, "{name} {n}");
            let dchi = char_derivative(&p, d.lambdas[n], &opts()).unwrap().value();
            assert!(rel_err(d.betas[n] * d.gammas[n], dchi) < 1e-6, "{name} {n}");
        }
    }
}

#[test]
fn symmetric_problems_have_alternating_beta() {
    let p = Problem::new(Potential::cosine(0.7, 2.0), BoundaryObject::robin(0.3), BoundaryObject::robin(0.3));
    let d = spectral_data(&p, 6, &opts()).unwrap();
    for (n, b) in d.betas.iter().enumerate() {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!((b - s).abs() < 1e-6, "{n}: {b}");
    }
    let bb = Problem::new(Potential::zero(), BoundaryObject::Inf(1), BoundaryObject::Inf(1));
    let l0 = eigenvalues(&bb, 1, &opts()).unwrap()[0];
    let b0 = beta(&bb, l0, &opts()).unwrap();
    assert!(b0 > 0.0);
}

#[test]
fn norming_integral_agrees_with_derivative_route() {
    let dd = presets::dirichlet_zero();
    assert!((norming_integral_check(&dd, 1.0, &opts()).unwrap() - PI / 2.0).abs() < 1e-6);
    let nn = presets::neumann_zero();
    assert!((norming_integral_check(&nn, 0.0, &opts()).unwrap() - PI).abs() < 1e-6);
    for p in [presets::bessel_l1(), presets::robin_cos(), presets::dirichlet_cos(), presets::double_singular()] {
        let d = spectral_data(&p, 4, &opts()).unwrap();
        for n in 0..4 {
            let g = norming_integral_check(&p, d.lambdas[n], &opts()).unwrap();
            assert!(rel_err(g, d.gammas[n]) < 1e-5, "{p:?} {n}: {g} vs {}", d.gammas[n]);
        }
    }
    assert!(norming_integral_check(&presets::pole_left(), 1.0, &opts()).is_err());
}

#[test]
fn product_matches_closed_forms() {
    let r = product_representation_check(&presets::dirichlet_zero(), 0.25, 200, &opts()).unwrap();
    assert!((r - 1.0).abs() < 0.01, "{r}");
    let r = product_representation_check(&presets::neumann_zero(), -1.0, 200, &opts()).unwrap();
    assert!((r - 1.0).abs() < 0.01, "{r}");
}

#[test]
fn eigenvalues_are_simple_zeros() {
    let p = presets::two_sided_poles();
    let l = eigenvalues(&p, 5, &opts()).unwrap();
    for w in l.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let a = char_function(&p, w[0] - 1e-3 * (w[1] - w[0]), &opts()).unwrap().signum();
        let b = char_function(&p, mid, &opts()).unwrap().signum();
        assert_ne!(a, b);
    }
}
