//! Checks of the spectral theorems and utilities on spectral data: eigenvalue
//! asymptotics, zero counts, the regularized trace, symmetry and data chains.

use crate::error::{Error, Result};
use crate::herglotz::BoundaryObject;
use crate::numeric::{inverse_square_tail, least_squares, Scaled};
use crate::ode::{self, Side, SolutionTrace, SolverOptions};
use crate::problem::Problem;
use crate::spectrum::{self, SpectralData};
use crate::transform;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Fitted parameters of `sqrt(lambda_n) = n - L + sigma / (pi n) + ...` and
/// `gamma_n ~ (pi/2) (n - L)^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsFit {
    pub l_hat: f64,
    pub sigma_hat: f64,
    pub gamma_exponent: f64,
    /// Partial sums of `(n (sqrt(lambda_n) - (n - L) - sigma / (pi n)))^2`, from `n = 1`.
    pub residual_sq_partial_sums: Vec<f64>,
}

impl AsymptoticsFit {
    /// Whether the last decade adds less than 1% to the residual sum. Sums at
    /// rounding level count as converged.
    pub fn residuals_plateau(&self) -> bool {
        let s = &self.residual_sq_partial_sums;
        if s.len() < 11 {
            return false;
        }
        let total = s[s.len() - 1];
        let increment = total - s[s.len() - 11];
        increment <= 0.01 * total || total < 1e-12
    }
}

pub const MIN_FIT_SIZE: usize = 30;

fn round_half(v: f64) -> f64 {
    (2.0 * v).round() / 2.0
}

pub fn fit_asymptotics(data: &SpectralData) -> Result<AsymptoticsFit> {
    let len = data.len();
    if len < MIN_FIT_SIZE {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SIZE,
            got: len,
        });
    }
    let decade = (len / 10).max(3);
    let l_raw = (len - decade..len)
        .map(|n| n as f64 - data.lambdas[n].sqrt())
        .sum::<f64>()
        / decade as f64;
    let l_hat = round_half(l_raw);
    let upper: Vec<usize> = (len / 2..len).filter(|&n| n as f64 - l_hat > 0.5).collect();
    let rows: Vec<Vec<f64>> = upper
        .iter()
        .map(|&n| {
            let t = 1.0 / n as f64;
            vec![1.0, t, t * t]
        })
        .collect();
    let y: Vec<f64> = upper
        .iter()
        .map(|&n| {
            let nf = n as f64;
            PI * nf * (data.lambdas[n].sqrt() - nf + l_hat)
        })
        .collect();
    let sigma_hat = least_squares(&rows, &y)?[0];
    let rows: Vec<Vec<f64>> = upper
        .iter()
        .map(|&n| {
            let m = n as f64 - l_hat;
            vec![1.0, m.ln(), 1.0 / m, 1.0 / (m * m)]
        })
        .collect();
    let y: Vec<f64> = upper.iter().map(|&n| data.gammas[n].ln()).collect();
    let gamma_exponent = least_squares(&rows, &y)?[1];
    let mut acc = 0.0;
    let residual_sq_partial_sums = (1..len)
        .map(|n| {
            let nf = n as f64;
            let r = nf * (data.lambdas[n].max(0.0).sqrt() - (nf - l_hat) - sigma_hat / (PI * nf));
            acc += r * r;
            acc
        })
        .collect();
    Ok(AsymptoticsFit {
        l_hat,
        sigma_hat,
        gamma_exponent,
        residual_sq_partial_sums,
    })
}

/// The eigenfunction for `lambda` on an increasing interior grid: `phi` on the
/// left half and `psi / beta` on the right half, each integrated from its own
/// end. Endpoints without a singularity are added with their exact start data,
/// so that a zero closer to such an end than the first grid point is seen.
pub fn eigenfunction_trace(problem: &Problem, lambda: f64, grid: &[f64], opts: &SolverOptions) -> Result<SolutionTrace> {
    let beta = spectrum::beta_scaled(problem, lambda, opts)?;
    let mid = grid.partition_point(|&x| x <= PI / 2.0);
    let phi = ode::left_regular(problem, lambda, &grid[..mid], opts)?;
    let psi = ode::right_regular(problem, lambda, &grid[mid..], opts)?;
    let mut trace = SolutionTrace {
        side: Side::Left,
        lambda,
        grid: Vec::with_capacity(grid.len() + 2),
        y: Vec::with_capacity(grid.len() + 2),
        dy: Vec::with_capacity(grid.len() + 2),
        logscale: Vec::with_capacity(grid.len() + 2),
    };
    let mut push = |x: f64, y: Scaled, dy: Scaled| {
        trace.grid.push(x);
        trace.y.push(y.mantissa);
        trace.dy.push(dy.relative_to(y.log));
        trace.logscale.push(y.log);
    };
    // (y, y') of each regular solution at its own nonsingular end
    let start = |b: &BoundaryObject, sign: f64| -> Option<(f64, f64)> {
        match b {
            BoundaryObject::Hn(_) => {
                let (up, down) = b.up_down(lambda);
                Some((down, -sign * up))
            }
            BoundaryObject::Inf(0) => Some((0.0, sign)),
            BoundaryObject::Inf(_) => None,
        }
    };
    if let Some((y, dy)) = start(&problem.left, 1.0) {
        push(0.0, Scaled::from_f64(y), Scaled::from_f64(dy));
    }
    for i in 0..phi.len() {
        push(
            phi.grid[i],
            Scaled::new(phi.y[i], phi.logscale[i]),
            Scaled::new(phi.dy[i], phi.logscale[i]),
        );
    }
    for i in 0..psi.len() {
        push(
            psi.grid[i],
            Scaled::new(psi.y[i], psi.logscale[i]).div(&beta),
            Scaled::new(psi.dy[i], psi.logscale[i]).div(&beta),
        );
    }
    if let Some((y, dy)) = start(&problem.right, -1.0) {
        push(PI, Scaled::from_f64(y).div(&beta), Scaled::from_f64(dy).div(&beta));
    }
    Ok(trace)
}

/// Sign changes of `y` on the open interval. Samples below `1e-12` of the
/// local magnitude count as zeros; a zero not accompanied by a sign change is
/// a grazing zero and is reported.
pub fn count_zeros(trace: &SolutionTrace) -> Result<usize> {
    let n = trace.len();
    let logs: Vec<f64> = (0..n)
        .map(|i| Scaled::new(trace.y[i], trace.logscale[i]).ln_abs())
        .collect();
    let is_zero = |i: usize| {
        let lo = i.saturating_sub(2);
        let hi = (i + 2).min(n - 1);
        let local = (lo..=hi).map(|j| logs[j]).filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        trace.y[i] == 0.0 || logs[i] < local + (1e-12f64).ln()
    };
    let signs: Vec<(usize, f64)> = (0..n)
        .filter(|&i| !is_zero(i))
        .map(|i| (i, trace.y[i].signum()))
        .collect();
    let mut count = 0;
    for w in signs.windows(2) {
        let ((i, a), (j, b)) = (w[0], w[1]);
        if a != b {
            count += 1;
        } else if j > i + 1 {
            return Err(Error::AmbiguousZero { x: trace.grid[i + 1] });
        }
    }
    Ok(count)
}

/// `n - Pi_f(lambda_n) - Pi_F(lambda_n)`.
pub fn expected_zeros(problem: &Problem, n: usize, lambda: f64) -> i64 {
    n as i64 - problem.left.pole_count_upto(lambda) as i64 - problem.right.pole_count_upto(lambda) as i64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub counts: Vec<i64>,
    pub expected: Vec<i64>,
}

impl OscillationReport {
    pub fn passed(&self) -> bool {
        self.counts == self.expected
    }
}

/// Zero counts of the eigenfunctions against the oscillation formula. A
/// grazing zero is recorded as the count `-1`.
pub fn oscillation_check(problem: &Problem, data: &SpectralData, opts: &SolverOptions) -> Result<OscillationReport> {
    let grid = ode::default_grid(problem);
    let counts = data
        .lambdas
        .par_iter()
        .map(|&l| {
            let t = eigenfunction_trace(problem, l, &grid, opts)?;
            Ok(match count_zeros(&t) {
                Ok(c) => c as i64,
                Err(Error::AmbiguousZero { .. }) => -1,
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let expected = data
        .lambdas
        .iter()
        .enumerate()
        .map(|(n, &l)| expected_zeros(problem, n, l))
        .collect();
    Ok(OscillationReport { counts, expected })
}

/// `a = (ind f + ind F) / 2` and `b = ((1/2) int q + omega_1 + Omega_1) / pi`.
pub fn trace_parameters(problem: &Problem) -> (f64, f64) {
    (problem.half_index_sum(), problem.sigma() / PI)
}

fn trace_term(n: usize, lambda: f64, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    if nf < a {
        lambda
    } else if nf == a {
        lambda - b
    } else {
        lambda - (nf - a).powi(2) - 2.0 * b
    }
}

/// `sum_{j >= 0} g(x + j)` for a smooth decaying `g`: explicit terms up to
/// `x + 4000`, then the Euler-Maclaurin remainder with the given antiderivative
/// tail `int_X^inf g` and derivative `g'`.
fn tail_sum(x: f64, g: impl Fn(f64) -> f64, integral: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64) -> f64 {
    const EXPLICIT: usize = 4000;
    let head: f64 = (0..EXPLICIT).map(|j| g(x + j as f64)).sum();
    let big = x + EXPLICIT as f64;
    head + integral(big) + g(big) / 2.0 - dg(big) / 12.0
}

/// Tail basis used for the regularized trace: `1/m^2`, `ln m / m^2` and `1/m^3`.
/// The logarithmic term appears when a singular endpoint meets a potential
/// with nonzero slope there.
const TAIL_BASIS: usize = 3;

fn tail_basis(m: f64) -> [f64; TAIL_BASIS] {
    let m2 = m * m;
    [1.0 / m2, m.ln() / m2, 1.0 / (m2 * m)]
}

fn tail_basis_sums(x: f64) -> [f64; TAIL_BASIS] {
    [
        inverse_square_tail(x),
        tail_sum(
            x,
            |m| m.ln() / (m * m),
            |m| (m.ln() + 1.0) / m,
            |m| (1.0 - 2.0 * m.ln()) / (m * m * m),
        ),
        tail_sum(x, |m| 1.0 / (m * m * m), |m| 0.5 / (m * m), |m| -3.0 / (m * m * m * m)),
    ]
}

/// The regularized trace from eigenvalues `lambdas[0..=2N]`. The terms with
/// `N < n <= 2N` are fitted by least squares to the tail basis, and the fitted
/// model supplies the terms past `2N`.
pub fn trace_series_from(lambdas: &[f64], a: f64, b: f64, n: usize) -> Result<f64> {
    if lambdas.len() < 2 * n + 1 {
        return Err(Error::InsufficientData {
            needed: 2 * n + 1,
            got: lambdas.len(),
        });
    }
    if n < 2 * TAIL_BASIS || (n as f64) <= a + 1.0 {
        return Err(Error::InvalidInput(format!("trace series needs more than {n} terms")));
    }
    let top = 2 * n;
    let partial: f64 = lambdas[..=top]
        .iter()
        .enumerate()
        .map(|(k, &l)| trace_term(k, l, a, b))
        .sum();
    let fit_range = n + 1..=top;
    let rows: Vec<Vec<f64>> = fit_range
        .clone()
        .map(|k| tail_basis(k as f64 - a).to_vec())
        .collect();
    let y: Vec<f64> = fit_range.map(|k| trace_term(k, lambdas[k], a, b)).collect();
    let c = least_squares(&rows, &y)?;
    let sums = tail_basis_sums(top as f64 + 1.0 - a);
    Ok(partial + c.iter().zip(sums).map(|(c, s)| c * s).sum::<f64>())
}

fn require_analytic(problem: &Problem) -> Result<()> {
    if problem.q.is_analytic() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "trace computations need an analytic potential".into(),
        ))
    }
}

pub const MIN_TRACE_TERMS: usize = 50;

pub fn regularized_trace_series(problem: &Problem, n: usize, opts: &SolverOptions) -> Result<f64> {
    require_analytic(problem)?;
    if n < MIN_TRACE_TERMS {
        return Err(Error::InvalidInput(format!(
            "trace series needs N >= {MIN_TRACE_TERMS}, got {n}"
        )));
    }
    let lambdas = spectrum::eigenvalues(problem, 2 * n + 1, opts)?;
    let (a, b) = trace_parameters(problem);
    trace_series_from(&lambdas, a, b, n)
}

/// The closed form of the regularized trace.
pub fn trace_closed_form(problem: &Problem) -> Result<f64> {
    require_analytic(problem)?;
    let (a, b) = trace_parameters(problem);
    let end = |own: &BoundaryObject, other: &BoundaryObject, q: f64| {
        let l = own.ell() as f64;
        let lo = other.ell() as f64;
        let sign = if (own.ell() + own.index()).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign * (2.0 * l + 1.0) / 4.0 * (q + lo * (lo + 1.0) / (PI * PI))
    };
    let (w1, w2) = problem.left.omega();
    let (o1, o2) = problem.right.omega();
    let mut t = end(&problem.left, &problem.right, problem.q.value(0.0))
        + end(&problem.right, &problem.left, problem.q.value(PI))
        - w1 * w1 / 2.0
        - o1 * o1 / 2.0
        - w2
        - o2;
    if a <= -1.0 {
        t -= (a * a + a + 6.0 * b) * (2.0 * a + 1.0) / 6.0;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub series_value: f64,
    pub closed_form: f64,
    pub a: f64,
    pub b: f64,
}

impl TraceReport {
    pub fn gap(&self) -> f64 {
        (self.series_value - self.closed_form).abs()
    }
}

pub fn trace_report(problem: &Problem, n: usize, opts: &SolverOptions) -> Result<TraceReport> {
    let closed_form = trace_closed_form(problem)?;
    let series_value = regularized_trace_series(problem, n, opts)?;
    let (a, b) = trace_parameters(problem);
    Ok(TraceReport {
        series_value,
        closed_form,
        a,
        b,
    })
}

/// `(1/2) int q + omega_1 + Omega_1` before and after one `T-hat` step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub before: f64,
    pub after: f64,
}

impl InvariantReport {
    pub fn passed(&self, tol: f64) -> bool {
        (self.before - self.after).abs() <= tol
    }
}

pub fn lemma_invariant_check(problem: &Problem, opts: &SolverOptions) -> Result<InvariantReport> {
    let step = transform::t_hat(problem, opts)?;
    Ok(InvariantReport {
        before: problem.sigma(),
        after: step.problem.sigma(),
    })
}

/// Whether `beta_n = (-1)^n` within `1e-5` for every computed `n`.
pub fn symmetric_check(data: &SpectralData) -> bool {
    data.betas.iter().enumerate().all(|(n, &b)| {
        let s = if n % 2 == 0 { b } else { -b };
        s > 0.0 && (s - 1.0).abs() <= 1e-5
    })
}

/// Prepends `K` prescribed eigenvalues and norming constants:
/// `lambda'_n = lambda_{n-K}` and
/// `gamma'_n = gamma_{n-K} prod_{m < min(n, K)} (lambda_{n-K} - lambda_{m-K})`,
/// where negative indices refer to the prefix.
pub fn data_chain(
    lambdas: &[f64],
    gammas: &[f64],
    k: usize,
    prefix_lambdas: &[f64],
    prefix_gammas: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if lambdas.len() != gammas.len() || lambdas.is_empty() {
        return Err(Error::InvalidInput("eigenvalues and norming constants must pair up".into()));
    }
    if prefix_lambdas.len() != k || prefix_gammas.len() != k {
        return Err(Error::DomainViolation(format!("prefix lists must have length {k}")));
    }
    let all_l: Vec<f64> = prefix_lambdas.iter().chain(lambdas).copied().collect();
    let all_g: Vec<f64> = prefix_gammas.iter().chain(gammas).copied().collect();
    if all_l.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::DomainViolation("eigenvalues must be strictly increasing".into()));
    }
    if all_g.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::DomainViolation("norming constants must be positive".into()));
    }
    let gammas_out = (0..all_l.len())
        .map(|n| {
            (0..n.min(k))
                .map(|m| all_l[n] - all_l[m])
                .fold(all_g[n], |acc, d| acc * d)
        })
        .collect();
    Ok((all_l, gammas_out))
}

/// Spectral data of the `T-hat` image: `lambda_{n+1}` and `gamma_{n+1} / (lambda_{n+1} - lambda_0)`.
pub fn hat_data_map(lambdas: &[f64], gammas: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if lambdas.len() < 2 || lambdas.len() != gammas.len() {
        return Err(Error::InsufficientData {
            needed: 2,
            got: lambdas.len().min(gammas.len()),
        });
    }
    let l0 = lambdas[0];
    Ok((
        lambdas[1..].to_vec(),
        lambdas[1..]
            .iter()
            .zip(&gammas[1..])
            .map(|(l, g)| g / (l - l0))
            .collect(),
    ))
}
