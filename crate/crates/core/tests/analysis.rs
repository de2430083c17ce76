mod common;

use common::{hn_strategy, tan_root};
use dspec_core::analysis::*;
use dspec_core::spectrum::spectral_data;
use dspec_core::{presets, BoundaryObject, Potential, Problem, SolverOptions, SpectralData};
use proptest::prelude::*;
use std::f64::consts::PI;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

/// Bessel-type data assembled from the `tan s = s` oracle rather than the solver.
fn bessel_oracle_data(count: usize) -> SpectralData {
    let lambdas: Vec<f64> = (1..=count).map(|k| (tan_root(k) / PI).powi(2)).collect();
    SpectralData {
        gammas: vec![1.0; count],
        betas: vec![1.0; count],
        lambdas,
        ind_f: -2,
        ind_right: -1,
    }
}

#[test]
fn asymptotics_of_closed_form_spectra() {
    let d = spectral_data(&presets::dirichlet_zero(), 60, &opts()).unwrap();
    let fit = fit_asymptotics(&d).unwrap();
    assert_eq!(fit.l_hat, -1.0);
    assert!(fit.sigma_hat.abs() < 1e-3);
    assert!((fit.gamma_exponent + 2.0).abs() < 0.05);
    assert!(fit.residuals_plateau());

    let fit = fit_asymptotics(&bessel_oracle_data(60)).unwrap();
    assert_eq!(fit.l_hat, -1.5);
    assert!((fit.sigma_hat + 1.0 / PI).abs() < 1e-2, "{}", fit.sigma_hat);
}

#[test]
fn asymptotics_need_enough_terms() {
    let d = spectral_data(&presets::dirichlet_zero(), 10, &opts()).unwrap();
    assert!(fit_asymptotics(&d).is_err());
}

#[test]
fn zero_counts_of_sine_eigenfunctions() {
    let p = presets::dirichlet_zero();
    let grid = dspec_core::ode::default_grid(&p);
    for n in [0usize, 3] {
        let k = (n + 1) as f64;
        let t = eigenfunction_trace(&p, k * k, &grid, &opts()).unwrap();
        assert_eq!(count_zeros(&t).unwrap(), n);
    }
}

#[test]
fn pole_below_eigenvalue_lowers_the_count() {
    let p = presets::pole_left();
    let d = spectral_data(&p, 8, &opts()).unwrap();
    let r = oscillation_check(&p, &d, &opts()).unwrap();
    assert!(r.passed(), "{:?} vs {:?}", r.counts, r.expected);
    let n = d.lambdas.iter().position(|&l| l > 3.0).unwrap();
    assert_eq!(expected_zeros(&p, n, d.lambdas[n]), n as i64 - 1);
}

#[test]
fn oscillation_on_bessel_problem() {
    let p = presets::bessel_l1();
    let d = spectral_data(&p, 9, &opts()).unwrap();
    assert!(oscillation_check(&p, &d, &opts()).unwrap().passed());
}

#[test]
fn trace_of_exact_spectra_vanishes() {
    let dd = presets::dirichlet_zero();
    assert_eq!(trace_parameters(&dd), (-1.0, 0.0));
    let sq: Vec<f64> = (0..101).map(|n| ((n + 1) * (n + 1)) as f64).collect();
    assert!(trace_series_from(&sq, -1.0, 0.0, 50).unwrap().abs() < 1e-12);
    assert!(trace_closed_form(&dd).unwrap().abs() < 1e-12);

    let nn = presets::neumann_zero();
    assert_eq!(trace_parameters(&nn), (0.0, 0.0));
    let sq: Vec<f64> = (0..101).map(|n| (n * n) as f64).collect();
    assert!(trace_series_from(&sq, 0.0, 0.0, 50).unwrap().abs() < 1e-12);
}

#[test]
fn bessel_trace_from_oracle_eigenvalues() {
    let p = presets::bessel_l1();
    let (a, b) = trace_parameters(&p);
    assert_eq!(a, -1.5);
    assert!((b + 1.0 / (PI * PI)).abs() < 1e-12);
    let oracle = bessel_oracle_data(101).lambdas;
    let series = trace_series_from(&oracle, a, b, 50).unwrap();
    assert!((series - trace_closed_form(&p).unwrap()).abs() < 1e-3);
}

#[test]
fn rational_trace_closed_form_degenerates() {
    // with l_f = l_F = -1 and a >= 0 the closed form is the rational-case expression
    let p = presets::robin_cos();
    let (w1, w2) = p.left.omega();
    let (o1, o2) = p.right.omega();
    let q0 = p.q.value(0.0);
    let qpi = p.q.value(PI);
    let sign = |i: i64| if i % 2 == 0 { 1.0 } else { -1.0 };
    let expr = sign(p.left.index()) * q0 / 4.0 + sign(p.right.index()) * qpi / 4.0
        - w1 * w1 / 2.0
        - o1 * o1 / 2.0
        - w2
        - o2;
    assert!((trace_closed_form(&p).unwrap() - expr).abs() < 1e-12);
}

#[test]
fn trace_rejects_sampled_potentials() {
    let q = Potential::Sampled(dspec_core::SampledPotential::from_fn(|x| x.sin(), 65).unwrap());
    let p = Problem::new(q, BoundaryObject::Inf(0), BoundaryObject::Inf(0));
    assert!(matches!(
        regularized_trace_series(&p, 50, &opts()),
        Err(dspec_core::Error::Unsupported(_))
    ));
}

#[test]
fn invariant_across_hat_on_closed_forms() {
    for p in [presets::dirichlet_zero(), presets::neumann_zero()] {
        let r = lemma_invariant_check(&p, &opts()).unwrap();
        assert!(r.passed(1e-4), "{} vs {}", r.before, r.after);
    }
}

#[test]
fn symmetry_detection() {
    let check = |p: &Problem| symmetric_check(&spectral_data(p, 8, &opts()).unwrap());
    assert!(check(&presets::dirichlet_zero()));
    assert!(!check(&presets::dirichlet_cos()));
    assert!(!check(&presets::bessel_l1()));
}

#[test]
fn data_chain_examples() {
    let l = vec![1.0, 4.0, 9.0, 16.0];
    let g = vec![0.5, 0.25, 0.125, 0.0625];
    let (cl, cg) = data_chain(&l, &g, 0, &[], &[]).unwrap();
    assert_eq!((cl, cg), (l.clone(), g.clone()));
    let (cl, cg) = data_chain(&l, &g, 1, &[0.0], &[1.0]).unwrap();
    assert_eq!(cl[..4], [0.0, 1.0, 4.0, 9.0]);
    assert_eq!(cg[0], 1.0);
    for n in 1..4 {
        assert!((cg[n] - g[n - 1] * l[n - 1]).abs() < 1e-15);
    }
    assert!(data_chain(&l, &g, 1, &[2.0], &[1.0]).is_err());
    assert!(data_chain(&l, &g, 1, &[0.0], &[-1.0]).is_err());
}

fn smooth_q(c: [f64; 3]) -> Potential {
    Potential::polynomial(vec![c[0], c[1], c[2] / PI])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn oscillation_on_random_problems(
        c in prop::array::uniform3(-2.0f64..2.0),
        f in hn_strategy(2),
        big_f in hn_strategy(1),
    ) {
        let p = Problem::new(smooth_q(c), BoundaryObject::Hn(f), BoundaryObject::Hn(big_f));
        let d = spectral_data(&p, 12, &opts()).unwrap();
        let r = oscillation_check(&p, &d, &opts()).unwrap();
        prop_assert!(r.passed(), "{:?} vs {:?}", r.counts, r.expected);
    }

    #[test]
    fn invariant_on_random_smooth_q(c in prop::array::uniform3(-2.0f64..2.0), ell in 0u32..2) {
        let p = Problem::new(smooth_q(c), BoundaryObject::Inf(ell), BoundaryObject::robin(0.4));
        let r = lemma_invariant_check(&p, &opts()).unwrap();
        prop_assert!(r.passed(1e-4), "{} vs {}", r.before, r.after);
    }

    #[test]
    fn hat_map_inverts_data_chain(k in 1usize..4, gap in 0.2f64..2.0) {
        let l: Vec<f64> = (0..20).map(|n| ((n + 1) * (n + 1)) as f64 + 0.1 * n as f64).collect();
        let g: Vec<f64> = (0..20).map(|n| 1.0 / (1.0 + n as f64).powi(2)).collect();
        let prefix: Vec<f64> = (0..k).map(|i| l[0] - gap * (k - i) as f64).collect();
        let pg: Vec<f64> = (0..k).map(|i| 0.5 + i as f64).collect();
        let (mut cl, mut cg) = data_chain(&l, &g, k, &prefix, &pg).unwrap();
        for _ in 0..k {
            (cl, cg) = hat_data_map(&cl, &cg).unwrap();
        }
        for n in 0..l.len() {
            prop_assert!((cl[n] - l[n]).abs() <= 1e-10 * l[n]);
            prop_assert!((cg[n] / g[n] - 1.0).abs() <= 1e-10);
        }
    }
}
