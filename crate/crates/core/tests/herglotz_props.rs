mod common;

use common::{admissible_mu, boundary_strategy, hn_strategy};
use dspec_core::herglotz::{lemma_hat_pair, lemma_hat_remainders, lemma_tilde_pair, theta_roundtrip_check};
use dspec_core::BoundaryObject;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn interlace(outer: &[f64], inner: &[f64]) -> bool {
    let mut all: Vec<(f64, u8)> = outer.iter().map(|&p| (p, 0)).chain(inner.iter().map(|&p| (p, 1))).collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    all.windows(2).all(|w| w[0].1 != w[1].1 && w[0].0 < w[1].0)
}

fn tau_for(f: &BoundaryObject, mu: f64, t: f64) -> f64 {
    match f {
        BoundaryObject::Hn(g) => g.evaluate(mu).unwrap() + 0.1 + 3.0 * t,
        BoundaryObject::Inf(_) => -2.0 + 4.0 * t,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hat_then_tilde_restores(f in boundary_strategy(3), t in 0.0f64..1.0) {
        let mu = admissible_mu(&f, t);
        prop_assert!(theta_roundtrip_check(mu, None, &f, TOL).unwrap());
    }

    #[test]
    fn tilde_then_hat_restores(f in boundary_strategy(3), t in 0.0f64..1.0, s in 0.0f64..1.0) {
        let mu = admissible_mu(&f, t);
        let tau = tau_for(&f, mu, s);
        prop_assert!(theta_roundtrip_check(mu, Some(tau), &f, TOL).unwrap());
    }

    #[test]
    fn maps_shift_the_index(f in boundary_strategy(3), t in 0.0f64..1.0, s in 0.0f64..1.0) {
        let mu = admissible_mu(&f, t);
        prop_assert_eq!(f.theta_hat(mu).unwrap().index(), f.index() - 1);
        let tau = tau_for(&f, mu, s);
        prop_assert_eq!(f.theta_tilde(mu, tau).unwrap().index(), f.index() + 1);
    }

    #[test]
    fn hat_poles_interlace(g in hn_strategy(3), t in 0.0f64..1.0) {
        let f = BoundaryObject::Hn(g.clone());
        prop_assume!(f.index() >= 3);
        let mu = admissible_mu(&f, t);
        let hat = f.theta_hat(mu).unwrap();
        let h = hat.as_hn().unwrap();
        prop_assert!(interlace(g.poles(), h.poles()));
        prop_assert!(f.smallest_pole() < hat.smallest_pole());
    }

    #[test]
    fn tilde_poles_interlace(g in hn_strategy(3), t in 0.0f64..1.0, s in 0.0f64..1.0) {
        let f = BoundaryObject::Hn(g.clone());
        prop_assume!(f.index() >= 2);
        let mu = admissible_mu(&f, t);
        let tilde = f.theta_tilde(mu, tau_for(&f, mu, s)).unwrap();
        prop_assert!(interlace(g.poles(), tilde.as_hn().unwrap().poles()));
        prop_assert!(f.smallest_pole() > tilde.smallest_pole());
    }

    #[test]
    fn hat_matches_polynomial_formula(g in hn_strategy(3), t in 0.0f64..1.0, x in -5.0f64..5.0) {
        let f = BoundaryObject::Hn(g.clone());
        prop_assume!(f.index() >= 1);
        let mu = admissible_mu(&f, t);
        let (r_up, r_down) = lemma_hat_remainders(&g, mu).unwrap();
        let scale = g.poly_pair().up.eval(mu).abs().max(g.poly_pair().down.eval(mu).abs()).max(1.0);
        prop_assert!(r_up.abs() <= 1e-9 * scale && r_down.abs() <= 1e-9 * scale);
        let (up, down) = lemma_hat_pair(&g, mu).unwrap().eval(x);
        let direct = match f.theta_hat(mu).unwrap() {
            BoundaryObject::Hn(h) => h.evaluate(x),
            BoundaryObject::Inf(_) => unreachable!(),
        };
        // skip points too close to a pole of either form
        prop_assume!(down.abs() > 1e-3 && direct.is_ok());
        let direct = direct.unwrap();
        prop_assert!((up / down - direct).abs() <= 1e-8 * direct.abs().max(1.0));
    }

    #[test]
    fn tilde_matches_polynomial_formula(g in hn_strategy(3), t in 0.0f64..1.0, s in 0.0f64..1.0, x in -5.0f64..5.0) {
        let f = BoundaryObject::Hn(g.clone());
        let mu = admissible_mu(&f, t);
        let tau = tau_for(&f, mu, s);
        let (up, down) = lemma_tilde_pair(&g, mu, tau).eval(x);
        let direct = f.theta_tilde(mu, tau).unwrap().as_hn().unwrap().evaluate(x);
        prop_assume!(down.abs() > 1e-3 && direct.is_ok());
        let direct = direct.unwrap();
        prop_assert!((up / down - direct).abs() <= 1e-8 * direct.abs().max(1.0));
    }

    #[test]
    fn boundary_json_round_trips(f in boundary_strategy(3)) {
        let text = dspec_core::io::to_json(&f).unwrap();
        let back: BoundaryObject = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn hat_rejects_mu_at_or_above_smallest_pole() {
    let f = BoundaryObject::Hn(dspec_core::RationalHN::new(0.0, 0.0, vec![1.0], vec![1.0]).unwrap());
    assert!(f.theta_hat(1.0).is_err());
    assert!(f.theta_tilde(1.5, 10.0).is_err());
}
