#![allow(dead_code)]

use dspec_core::{BoundaryObject, RationalHN};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Rational Herglotz functions with well separated poles and moderate residues.
pub fn hn_strategy(max_poles: usize) -> impl Strategy<Value = RationalHN> {
    (
        prop_oneof![Just(0.0), 0.2f64..2.0],
        -2.0f64..2.0,
        -2.0f64..2.0,
        prop::collection::vec((0.5f64..3.0, 0.3f64..3.0), 0..=max_poles),
    )
        .prop_map(|(h0, h, start, gaps)| {
            let mut poles = Vec::new();
            let mut residues = Vec::new();
            let mut p = start;
            for (gap, d) in gaps {
                poles.push(p);
                residues.push(d);
                p += gap;
            }
            RationalHN::new(h0, h, poles, residues).unwrap()
        })
}

pub fn boundary_strategy(max_poles: usize) -> impl Strategy<Value = BoundaryObject> {
    prop_oneof![
        3 => hn_strategy(max_poles).prop_map(BoundaryObject::Hn),
        1 => (0u32..4).prop_map(BoundaryObject::Inf),
    ]
}

/// A point below the smallest pole, at least `0.2` away from it.
pub fn admissible_mu(f: &BoundaryObject, t: f64) -> f64 {
    let p = f.smallest_pole();
    if p.is_finite() {
        p - 0.2 - 2.8 * t
    } else {
        -3.0 + 6.0 * t
    }
}

/// The `k`-th positive root of `tan s = s`, by bisection on `sin s - s cos s`
/// over `(k pi, k pi + pi/2)`.
pub fn tan_root(k: usize) -> f64 {
    let g = |s: f64| s.sin() - s * s.cos();
    let (mut a, mut b) = (k as f64 * PI + 1e-12, (k as f64 + 0.5) * PI - 1e-12);
    let ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(m).signum() == ga.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}
