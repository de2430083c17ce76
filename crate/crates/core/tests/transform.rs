mod common;

use common::rel_err;
use dspec_core::ode::char_function;
use dspec_core::spectrum::spectral_data;
use dspec_core::transform::{apply_chain, retained_distance, retained_grid, t_hat, t_tilde, StepSpec};
use dspec_core::{presets, BoundaryObject, Potential, SolverOptions};
use std::f64::consts::PI;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn hat_of_sine_problem() {
    let dd = presets::dirichlet_zero();
    let step = t_hat(&dd, &opts()).unwrap();
    assert!((step.mu - 1.0).abs() < 1e-9 && (step.nu - PI / 2.0).abs() < 1e-6);
    assert_eq!(step.problem.left, BoundaryObject::Inf(1));
    assert_eq!(step.problem.right, BoundaryObject::Inf(1));
    let d = spectral_data(&step.problem, 6, &opts()).unwrap();
    for n in 0..6 {
        let k = (n + 2) as f64;
        assert!((d.lambdas[n] - k * k).abs() < 1e-6, "{n}: {}", d.lambdas[n]);
    }
    assert!((d.gammas[0] - PI / 24.0).abs() < 1e-5);
}

#[test]
fn tilde_inserts_the_prescribed_pair() {
    for p in [presets::robin_cos(), presets::bessel_l1(), presets::pole_left()] {
        let base = spectral_data(&p, 6, &opts()).unwrap();
        let (mu, nu) = (base.lambdas[0] - 1.5, 0.8);
        let step = t_tilde(mu, nu, &p, &opts()).unwrap();
        assert_eq!(step.problem.left.index(), p.left.index() + 1);
        assert_eq!(step.problem.right.index(), p.right.index() + 1);
        let d = spectral_data(&step.problem, 6, &opts()).unwrap();
        assert!((d.lambdas[0] - mu).abs() <= 1e-6 * mu.abs().max(1.0));
        assert!(rel_err(d.gammas[0], nu) <= 1e-5);
        for n in 1..6 {
            let l = base.lambdas[n - 1];
            assert!((d.lambdas[n] - l).abs() <= 1e-6 * l.abs().max(1.0), "{n}");
            assert!(rel_err(d.gammas[n], base.gammas[n - 1] * (l - mu)) <= 1e-5, "{n}");
        }
    }
}

#[test]
fn hat_then_tilde_recovers_sine_problem() {
    let dd = presets::dirichlet_zero();
    let rec = apply_chain(&dd, &[StepSpec::Hat], &opts()).unwrap();
    let s = &rec.steps[0];
    let back = t_tilde(s.mu, s.nu, rec.last(), &opts()).unwrap();
    assert!(retained_distance(&back.problem.q, &Potential::zero()) <= 1e-5);
    assert_eq!(back.problem.left, BoundaryObject::Inf(0));
    assert_eq!(back.problem.right, BoundaryObject::Inf(0));
}

#[test]
fn two_hat_steps_on_sine_problem() {
    let rec = apply_chain(&presets::dirichlet_zero(), &[StepSpec::Hat, StepSpec::Hat], &opts()).unwrap();
    assert_eq!(rec.problems.len(), 3);
    let last = rec.last();
    assert_eq!((last.left.index(), last.right.index()), (-3, -3));
    let l = spectral_data(last, 4, &opts()).unwrap().lambdas;
    for (n, lam) in l.iter().enumerate() {
        let k = (n + 3) as f64;
        assert!((lam - k * k).abs() < 1e-5, "{n}: {lam}");
    }
    for w in rec.problems.windows(2) {
        assert_eq!(w[0].left.index() - 1, w[1].left.index());
    }
}

#[test]
fn characteristic_function_factorizes() {
    for p in [presets::robin_cos(), presets::two_sided_poles(), presets::singular_affine()] {
        let step = t_hat(&p, &opts()).unwrap();
        let l = spectral_data(&p, 4, &opts()).unwrap().lambdas;
        let samples = [l[0] - 3.0, 0.5 * (l[0] + l[1]), 0.5 * (l[1] + l[2]), 0.5 * (l[2] + l[3]), l[3] + 1.7];
        for lam in samples {
            let chi = char_function(&p, lam, &opts()).unwrap();
            let chi_hat = char_function(&step.problem, lam, &opts()).unwrap();
            let ratio = chi.div(&chi_hat).value();
            assert!(rel_err(ratio, step.mu - lam) < 1e-5, "{lam}: {ratio} vs {}", step.mu - lam);
        }
    }
}

#[test]
fn transformed_potential_stays_smooth() {
    // difference quotients of a smooth q-hat settle as the stencil halves
    let step = t_hat(&presets::robin_cos(), &opts()).unwrap();
    let xs = retained_grid();
    let q = &step.problem.q;
    let slope = |h: f64| {
        xs.iter()
            .filter(|&&x| x - h > 0.1 && x + h < PI - 0.1)
            .map(|&x| ((q.value(x + h) - q.value(x - h)) / (2.0 * h)).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (slope(0.02), slope(0.01));
    assert!(coarse.is_finite() && fine.is_finite());
    assert!((coarse - fine).abs() <= 0.05 * fine.max(1.0), "{coarse} vs {fine}");
}

#[test]
fn tilde_rejects_points_inside_the_spectrum() {
    let p = presets::robin_cos();
    let l0 = spectral_data(&p, 1, &opts()).unwrap().lambdas[0];
    assert!(t_tilde(l0 + 0.1, 1.0, &p, &opts()).is_err());
    assert!(t_tilde(l0 - 1.0, 0.0, &p, &opts()).is_err());
    let e = apply_chain(&p, &[StepSpec::Tilde { mu: l0, nu: 1.0 }], &opts()).unwrap_err();
    assert!(e.is_input_error());
}
