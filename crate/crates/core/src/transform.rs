//! The single commutation maps `T-hat` (remove the lowest eigenvalue) and
//! `T-tilde` (insert an eigenvalue below the spectrum).
//!
//! Transformed potentials are sampled on a uniform grid of [`GRID_INTERVALS`]
//! intervals. Two independent routes produce `q-hat` on the retained grid
//! `[EXCLUSION, pi - EXCLUSION]`: the Riccati closed form and a numerical
//! derivative of the regularized log-derivative `v`. At an endpoint where the
//! closed form subtracts cancelling inverse-square terms, the samples inside
//! the exclusion zone come from a Riccati equation for `v / t` integrated in
//! `ln t` (`t` the distance to the endpoint), which involves no cancellation;
//! at other endpoints the closed form is used up to the endpoint.

use crate::error::{Error, Result};
use crate::herglotz::BoundaryObject;
use crate::numeric::Scaled;
use crate::ode::{self, Side, SolverOptions};
use crate::potential::{Potential, SampledPotential};
use crate::problem::Problem;
use crate::spectrum;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const GRID_INTERVALS: usize = 1024;
pub const EXCLUSION: f64 = 0.02 * PI;
/// Largest tolerated sup-norm gap between the two potential routes.
pub const ROUTE_TOLERANCE: f64 = 1e-4;
/// Steps per unit of `ln t` in the exclusion-zone integration.
const ZONE_STEPS_PER_UNIT: f64 = 100.0;
/// Where the exclusion-zone integration meets its series limit, relative to the zone radius.
const ZONE_FLOOR: f64 = 1e-9;

/// Abscissae of the output grid, both endpoints included.
pub fn transform_grid() -> Vec<f64> {
    (0..=GRID_INTERVALS)
        .map(|i| PI * i as f64 / GRID_INTERVALS as f64)
        .collect()
}

pub fn is_retained(x: f64) -> bool {
    (EXCLUSION..=PI - EXCLUSION).contains(&x)
}

/// The grid points outside the exclusion zones.
pub fn retained_grid() -> Vec<f64> {
    transform_grid().into_iter().filter(|&x| is_retained(x)).collect()
}

/// Result of one transformation step.
#[derive(Clone, Debug)]
pub struct Step {
    pub problem: Problem,
    /// For `T-hat` the removed pair `(lambda_0, gamma_0)`, for `T-tilde` the inserted one.
    pub mu: f64,
    pub nu: f64,
    /// Sup-norm gap between the two potential routes on the retained grid.
    pub route_gap: f64,
}

/// Index range `[lo, hi]` of the retained grid.
fn retained_range() -> (usize, usize) {
    let grid = transform_grid();
    let lo = grid.iter().position(|&x| is_retained(x)).unwrap();
    let hi = grid.iter().rposition(|&x| is_retained(x)).unwrap();
    (lo, hi)
}

/// Builds the transformed potential from log-derivatives `w` on the full grid.
/// `w` must be finite at interior points and at each endpoint whose exponent
/// is zero.
///
/// Closed form: `-q + 2 lambda + 2 (w^2 - a^2 / x^2 - b^2 / (pi - x)^2)`.
/// Derivative route: `q - 2 v'` with `v = w - s a / x + s b / (pi - x)`.
/// An endpoint with a nonzero exponent has cancelling singular terms; its
/// exclusion zone is computed by [`zone_profile`]. The returned gap also
/// covers the mismatch of the two computations at the zone edges.
fn darboux_potential(
    problem: &Problem,
    lambda: f64,
    w: &[f64],
    (a, b): (f64, f64),
    s: f64,
) -> Result<(SampledPotential, f64)> {
    let grid = transform_grid();
    let n = grid.len() - 1;
    let (lo, hi) = retained_range();
    let mid = n / 2;
    let h = PI / GRID_INTERVALS as f64;
    let v = |i: usize| {
        let x = grid[i];
        w[i] - s * a / x + s * b / (PI - x)
    };
    let first = if a == 0.0 { 0 } else { lo };
    let last = if b == 0.0 { n } else { hi };
    let mut values = vec![0.0; grid.len()];
    for i in first..=last {
        let x = grid[i];
        let mut c = w[i] * w[i];
        if a != 0.0 {
            c -= a * a / (x * x);
        }
        if b != 0.0 {
            c -= b * b / ((PI - x) * (PI - x));
        }
        values[i] = -problem.q.value(x) + 2.0 * lambda + 2.0 * c;
        if !values[i].is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite potential at x = {x}")));
        }
    }
    let mut gap = 0.0f64;
    for i in lo..=hi {
        // w is pieced together at mid | mid + 1, so stencils stay on one side
        let dv = if i <= mid && i + 2 > mid {
            (25.0 * v(i) - 48.0 * v(i - 1) + 36.0 * v(i - 2) - 16.0 * v(i - 3) + 3.0 * v(i - 4)) / (12.0 * h)
        } else if i > mid && i - 2 <= mid {
            (-25.0 * v(i) + 48.0 * v(i + 1) - 36.0 * v(i + 2) + 16.0 * v(i + 3) - 3.0 * v(i + 4)) / (12.0 * h)
        } else {
            (v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2)) / (12.0 * h)
        };
        let derived = problem.q.value(grid[i]) - 2.0 * dv;
        gap = gap.max((values[i] - derived).abs());
    }
    if a != 0.0 {
        // zone nodes 0..=lo, ascending in the distance t = x
        let ts: Vec<f64> = grid[..=lo].to_vec();
        let z = zone_profile(problem, Side::Left, lambda, s, a, &ts, w[lo] - s * a / grid[lo])?;
        for (i, &t) in ts.iter().enumerate() {
            let other = if b != 0.0 { b * b / ((PI - t) * (PI - t)) } else { 0.0 };
            let value = -problem.q.value(t) + 2.0 * lambda + 2.0 * (2.0 * s * a * z[i] + t * t * z[i] * z[i]) - 2.0 * other;
            if i == lo {
                gap = gap.max((value - values[i]).abs());
            }
            values[i] = value;
        }
    }
    if b != 0.0 {
        // zone nodes n..=hi, ascending in the distance t = pi - x
        let idx: Vec<usize> = (hi..=n).rev().collect();
        let ts: Vec<f64> = idx.iter().map(|&i| PI - grid[i]).collect();
        let edge = -w[hi] - s * b / (PI - grid[hi]);
        let z = zone_profile(problem, Side::Right, lambda, s, b, &ts, edge)?;
        for (k, &i) in idx.iter().enumerate() {
            let x = grid[i];
            let t = ts[k];
            let other = if a != 0.0 { a * a / (x * x) } else { 0.0 };
            let value = -problem.q.value(x) + 2.0 * lambda + 2.0 * (2.0 * s * b * z[k] + t * t * z[k] * z[k]) - 2.0 * other;
            if i == hi {
                gap = gap.max((value - values[i]).abs());
            }
            values[i] = value;
        }
    }
    if !(gap <= ROUTE_TOLERANCE) {
        return Err(Error::NumericalFailure(format!(
            "potential routes disagree by {gap:.3e}"
        )));
    }
    Ok((SampledPotential::new(grid, values)?, gap))
}

/// `z = v / t` on the exclusion zone of one endpoint, where `t` is the
/// distance to the endpoint and `v = w - s e / t` the regularized
/// log-derivative in that local coordinate. With `tau = ln t`,
///
/// `dz/dtau = c(t) - (1 + 2 s e) z - t^2 z^2`,
///
/// where `c` is the regular part of the coefficient `q - lambda` plus the
/// inverse-square term of the far endpoint. The linear part is constant in
/// `tau`, so classical Runge-Kutta is accurate down to `t = 0`, where
/// `z = c(0) / (1 + 2 s e)`. For `s = 1` the equation is stable marching
/// away from the endpoint and starts from that limit; for `s = -1` it is
/// stable marching towards it and starts from `edge`, the value of `v` at
/// the last node of `ts`.
///
/// `ts` ascends from `0`.
fn zone_profile(problem: &Problem, side: Side, lambda: f64, s: f64, e: f64, ts: &[f64], edge: f64) -> Result<Vec<f64>> {
    let far = match side {
        Side::Left => problem.right.ell(),
        Side::Right => problem.left.ell(),
    } as f64;
    let c = |t: f64| {
        let x = match side {
            Side::Left => t,
            Side::Right => PI - t,
        };
        let mut v = problem.q.value(x) - lambda;
        if far > 0.0 {
            v += far * (far + 1.0) / ((PI - t) * (PI - t));
        }
        v
    };
    let k = 1.0 + 2.0 * s * e;
    let rhs = |tau: f64, z: f64| {
        let t = tau.exp();
        c(t) - k * z - t * t * z * z
    };
    let advance = |mut tau: f64, mut z: f64, to: f64| {
        let steps = ((to - tau).abs() * ZONE_STEPS_PER_UNIT).ceil().max(1.0);
        let h = (to - tau) / steps;
        for _ in 0..steps as usize {
            let k1 = rhs(tau, z);
            let k2 = rhs(tau + 0.5 * h, z + 0.5 * h * k1);
            let k3 = rhs(tau + 0.5 * h, z + 0.5 * h * k2);
            let k4 = rhs(tau + h, z + h * k3);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            tau += h;
        }
        z
    };
    let m = ts.len() - 1;
    let floor = (ZONE_FLOOR * ts[m]).ln();
    let limit = c(0.0) / k;
    let mut z = vec![0.0; ts.len()];
    z[0] = limit;
    if s > 0.0 {
        let mut tau = floor;
        let mut cur = c(ts[m] * ZONE_FLOOR) / k;
        for i in 1..=m {
            let to = ts[i].ln();
            cur = advance(tau, cur, to);
            tau = to;
            z[i] = cur;
        }
    } else {
        let mut tau = ts[m].ln();
        let mut cur = edge / ts[m];
        z[m] = cur;
        for i in (1..m).rev() {
            let to = ts[i].ln();
            cur = advance(tau, cur, to);
            tau = to;
            z[i] = cur;
        }
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("exclusion-zone integration diverged".into()));
    }
    Ok(z)
}

fn check_offset(opts: &SolverOptions) -> Result<()> {
    if !(EXCLUSION > opts.start_offset) {
        return Err(Error::InvalidInput(format!(
            "start offset {} exceeds the exclusion radius",
            opts.start_offset
        )));
    }
    Ok(())
}

/// `ell + 1`, the coefficient of `1/x` in the ground state log-derivative.
fn hat_exponent(b: &BoundaryObject) -> f64 {
    (b.ell() + 1) as f64
}

/// `max(ell, 0)`, minus the coefficient of `1/x` in `u'/u`.
fn tilde_exponent(b: &BoundaryObject) -> f64 {
    b.ell().max(0) as f64
}

/// `T-hat` with the ground state pair `(lambda_0, gamma_0)` already known.
pub fn t_hat_at(problem: &Problem, lambda0: f64, gamma0: f64, opts: &SolverOptions) -> Result<Step> {
    check_offset(opts)?;
    let grid = transform_grid();
    let n = grid.len() - 1;
    let mid = n / 2;
    let (phi, psi) = rayon::join(
        || ode::left_regular(problem, lambda0, &grid[1..=mid], opts),
        || ode::right_regular(problem, lambda0, &grid[mid + 1..n], opts),
    );
    let (phi, psi) = (phi?, psi?);
    let exps = (hat_exponent(&problem.left), hat_exponent(&problem.right));
    // at an end with zero exponent the start data give the log-derivative
    let end_ratio = |b: &BoundaryObject, sign: f64, exp: f64| {
        if exp == 0.0 {
            let (up, down) = b.up_down(lambda0);
            sign * up / down
        } else {
            f64::NAN
        }
    };
    let w: Vec<f64> = std::iter::once(end_ratio(&problem.left, -1.0, exps.0))
        .chain((0..phi.len()).map(|i| phi.log_derivative(i)))
        .chain((0..psi.len()).map(|i| psi.log_derivative(i)))
        .chain(std::iter::once(end_ratio(&problem.right, 1.0, exps.1)))
        .collect();
    let (q, gap) = darboux_potential(problem, lambda0, &w, exps, 1.0)?;
    let out = Problem::new(
        Potential::Sampled(q),
        problem.left.theta_hat(lambda0)?,
        problem.right.theta_hat(lambda0)?,
    );
    Ok(Step {
        problem: out,
        mu: lambda0,
        nu: gamma0,
        route_gap: gap,
    })
}

/// `T-hat`: removes the lowest eigenvalue. The returned `(mu, nu)` is
/// `(lambda_0, gamma_0)` of the input, which `T-tilde` needs to undo the step.
pub fn t_hat(problem: &Problem, opts: &SolverOptions) -> Result<Step> {
    let lambda0 = spectrum::eigenvalues(problem, 1, opts)?[0];
    let gamma0 = spectrum::norming_constants(problem, &[lambda0], opts)?[0];
    t_hat_at(problem, lambda0, gamma0, opts)
}

/// Whether the endpoint needs the ratio of `u` (nonsingular or Dirichlet).
fn needs_ratio(b: &BoundaryObject) -> bool {
    b.ell() <= 0
}

/// `T-tilde`: inserts the eigenvalue `mu` with norming constant `nu` below the spectrum.
pub fn t_tilde(mu: f64, nu: f64, problem: &Problem, opts: &SolverOptions) -> Result<Step> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::DomainViolation(format!(
            "norming constant must be positive, got {nu}"
        )));
    }
    if !mu.is_finite() {
        return Err(Error::DomainViolation(format!("mu must be finite, got {mu}")));
    }
    check_offset(opts)?;
    let lambda0 = spectrum::eigenvalues(problem, 1, opts)?[0];
    if mu >= lambda0 {
        return Err(Error::DomainViolation(format!(
            "mu = {mu} must lie below the smallest eigenvalue {lambda0}"
        )));
    }
    let chi = ode::char_function(problem, mu, opts)?;
    // chi < 0 below the spectrum, so u = psi + c phi has c > 0
    let c = Scaled::new(-chi.mantissa / nu, chi.log);
    if !(c.mantissa > 0.0) {
        return Err(Error::NumericalFailure(format!(
            "characteristic function is not negative at mu = {mu}"
        )));
    }
    let grid = transform_grid();
    let n = grid.len() - 1;
    let left_end = needs_ratio(&problem.left);
    let right_end = needs_ratio(&problem.right);
    let mut asc = grid[1..n].to_vec();
    if right_end {
        asc.push(PI);
    }
    let mut desc: Vec<f64> = grid[1..n].iter().rev().copied().collect();
    if left_end {
        desc.push(0.0);
    }
    let (phi, psi) = rayon::join(
        || ode::regular_samples(problem, Side::Left, mu, &asc, opts),
        || ode::regular_samples(problem, Side::Right, mu, &desc, opts),
    );
    let (mut phi, mut psi) = (phi?, psi?);
    psi.reverse();
    // start data of each solution at its own endpoint, as (y, y', log)
    let start = |b: &BoundaryObject, right: bool| match (b, right) {
        (BoundaryObject::Hn(_), false) => {
            let (up, down) = b.up_down(mu);
            (down, -up, 0.0)
        }
        (BoundaryObject::Hn(_), true) => {
            let (up, down) = b.up_down(mu);
            (down, up, 0.0)
        }
        (BoundaryObject::Inf(_), false) => (0.0, 1.0, 0.0),
        (BoundaryObject::Inf(_), true) => (0.0, -1.0, 0.0),
    };
    let nan = (f64::NAN, f64::NAN, 0.0);
    phi.insert(0, if left_end { start(&problem.left, false) } else { nan });
    if !right_end {
        phi.push(nan);
    }
    psi.push(if right_end { start(&problem.right, true) } else { nan });
    if !left_end {
        psi.insert(0, nan);
    }
    let w: Vec<f64> = (0..=n)
        .map(|i| {
            let (p, q) = (phi[i], psi[i]);
            let u = Scaled::new(q.0, q.2).add(&c.mul(&Scaled::new(p.0, p.2)));
            let du = Scaled::new(q.1, q.2).add(&c.mul(&Scaled::new(p.1, p.2)));
            du.div(&u).value()
        })
        .collect();
    if w[1..n].iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("u vanishes on the grid".into()));
    }
    let tau_left = if left_end { -w[0] } else { f64::NAN };
    let tau_right = if right_end { w[n] } else { f64::NAN };
    let exps = (tilde_exponent(&problem.left), tilde_exponent(&problem.right));
    let (q, gap) = darboux_potential(problem, mu, &w, exps, -1.0)?;
    let out = Problem::new(
        Potential::Sampled(q),
        problem.left.theta_tilde(mu, tau_left)?,
        problem.right.theta_tilde(mu, tau_right)?,
    );
    Ok(Step {
        problem: out,
        mu,
        nu,
        route_gap: gap,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Hat,
    Tilde,
}

/// A requested step. Hat steps determine their own `(mu, nu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "direction", rename_all = "lowercase", deny_unknown_fields)]
pub enum StepSpec {
    Hat,
    Tilde { mu: f64, nu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub direction: Direction,
    pub mu: f64,
    pub nu: f64,
    pub route_gap: f64,
}

/// Every intermediate problem of a chain, starting with the input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub steps: Vec<ChainStep>,
    pub problems: Vec<Problem>,
}

impl ChainRecord {
    pub fn last(&self) -> &Problem {
        self.problems.last().expect("a chain holds its input problem")
    }
}

pub fn apply_chain(problem: &Problem, steps: &[StepSpec], opts: &SolverOptions) -> Result<ChainRecord> {
    let mut record = ChainRecord {
        steps: Vec::with_capacity(steps.len()),
        problems: vec![problem.clone()],
    };
    for spec in steps {
        let current = record.last();
        let (step, direction) = match *spec {
            StepSpec::Hat => (t_hat(current, opts)?, Direction::Hat),
            StepSpec::Tilde { mu, nu } => (t_tilde(mu, nu, current, opts)?, Direction::Tilde),
        };
        record.steps.push(ChainStep {
            direction,
            mu: step.mu,
            nu: step.nu,
            route_gap: step.route_gap,
        });
        record.problems.push(step.problem);
    }
    Ok(record)
}

/// Sup-norm distance of two potentials over the retained grid.
pub fn retained_distance(a: &Potential, b: &Potential) -> f64 {
    retained_grid()
        .into_iter()
        .map(|x| (a.value(x) - b.value(x)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd() -> Problem {
        Problem::new(Potential::zero(), BoundaryObject::Inf(0), BoundaryObject::Inf(0))
    }

    #[test]
    fn retained_grid_bounds() {
        let (lo, hi) = retained_range();
        let g = transform_grid();
        assert!(g[lo] >= EXCLUSION && g[lo - 1] < EXCLUSION);
        assert!(g[hi] <= PI - EXCLUSION && g[hi + 1] > PI - EXCLUSION);
        assert!(lo >= 2 && hi + 2 < g.len());
    }

    #[test]
    fn sine_ground_state_potential() {
        let opts = SolverOptions::default();
        let step = t_hat(&dd(), &opts).unwrap();
        assert_eq!(step.problem.left, BoundaryObject::Inf(1));
        assert_eq!(step.problem.right, BoundaryObject::Inf(1));
        assert!((step.mu - 1.0).abs() < 1e-9);
        assert!((step.nu - PI / 2.0).abs() < 1e-7);
        let err = retained_grid()
            .into_iter()
            .map(|x| {
                let s = x.sin();
                let exact = 2.0 / (s * s) - 2.0 / (x * x) - 2.0 / ((PI - x) * (PI - x));
                (step.problem.q.value(x) - exact).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn tilde_rejects_inadmissible_pairs() {
        let opts = SolverOptions::default();
        assert!(matches!(
            t_tilde(1.5, 1.0, &dd(), &opts),
            Err(Error::DomainViolation(_))
        ));
        assert!(matches!(
            t_tilde(0.0, -1.0, &dd(), &opts),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn step_spec_json() {
        let s: Vec<StepSpec> =
            serde_json::from_str(r#"[{"direction":"hat"},{"direction":"tilde","mu":0.5,"nu":2.0}]"#).unwrap();
        assert_eq!(s, vec![StepSpec::Hat, StepSpec::Tilde { mu: 0.5, nu: 2.0 }]);
    }
}
