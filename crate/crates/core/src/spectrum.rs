//! Eigenvalues, the proportionality constants `beta_n` and norming constants `gamma_n`.

use crate::error::{Error, Result};
use crate::numeric::{brent, inverse_square_tail, simpson, Scaled};
use crate::ode::{self, SolverOptions};
use crate::problem::Problem;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub ind_f: i64,
    #[serde(rename = "ind_F")]
    pub ind_right: i64,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn half_index_sum(&self) -> f64 {
        (self.ind_f + self.ind_right) as f64 / 2.0
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,lambda,beta,gamma\n");
        for n in 0..self.len() {
            s.push_str(&format!(
                "{n},{:.16e},{:.16e},{:.16e}\n",
                self.lambdas[n], self.betas[n], self.gammas[n]
            ));
        }
        s
    }
}

fn chi_sign(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<f64> {
    Ok(ode::char_function(problem, lambda, opts)?.signum())
}

/// Whether both regular solutions are positive on a coarse interior grid.
fn solutions_positive(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<bool> {
    let grid: Vec<f64> = (1..128).map(|i| PI * i as f64 / 128.0).collect();
    let pts = ode::solutions_at(problem, lambda, &grid, opts)?;
    Ok(pts.iter().all(|p| p.phi.0 > 0.0 && p.psi.0 > 0.0))
}

/// A level below the smallest eigenvalue: `chi < 0` there and both regular
/// solutions are free of zeros.
fn spectral_floor(problem: &Problem, opts: &SolverOptions) -> Result<f64> {
    let grid = ode::default_grid(problem);
    let vmin = grid
        .iter()
        .map(|&x| problem.q.value(x) + problem.singular_part(x))
        .fold(f64::INFINITY, f64::min);
    let pole = problem.left.smallest_pole().min(problem.right.smallest_pole());
    let base = vmin.min(pole) - 1.0;
    let mut step = 1.0f64.max(base.abs());
    let mut floor = base;
    for _ in 0..60 {
        if chi_sign(problem, floor, opts)? < 0.0 && solutions_positive(problem, floor, opts)? {
            return Ok(floor);
        }
        floor = base - step;
        step *= 2.0;
    }
    Err(Error::NumericalFailure(
        "could not find a level below the smallest eigenvalue".into(),
    ))
}

/// Root of `chi` in `[lo, hi]` given the known signs at both ends.
fn polish(problem: &Problem, lo: f64, hi: f64, opts: &SolverOptions) -> Result<f64> {
    let reference = ode::char_function(problem, lo, opts)?;
    let rel = |c: Scaled| -> f64 {
        let d = (c.log - reference.log).clamp(-700.0, 700.0);
        c.mantissa * d.exp()
    };
    let flo = rel(reference);
    let fhi = rel(ode::char_function(problem, hi, opts)?);
    let xtol = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    brent(
        |l| Ok(rel(ode::char_function(problem, l, opts)?)),
        lo,
        hi,
        flo,
        fhi,
        xtol,
        200,
    )
}

/// Scan nodes on `(floor, top]`, uniform in `sqrt(lambda - floor)`, with extra
/// nodes around poles of the boundary functions.
fn scan_nodes(problem: &Problem, floor: f64, top: f64, dt: f64) -> Vec<f64> {
    let tmax = (top - floor).sqrt();
    let n = (tmax / dt).ceil().max(4.0) as usize;
    let mut nodes: Vec<f64> = (1..=n)
        .map(|i| floor + (tmax * i as f64 / n as f64).powi(2))
        .collect();
    for obj in [&problem.left, &problem.right] {
        if let Some(f) = obj.as_hn() {
            for &p in f.poles() {
                if p > floor && p < top {
                    for k in 1..=8 {
                        let d = 0.5f64.powi(k) * (1.0 + p.abs()) * dt;
                        nodes.push(p - d);
                        nodes.push(p + d);
                    }
                    nodes.push(p);
                }
            }
        }
    }
    nodes.retain(|&x| x > floor && x <= top);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// The first `count` eigenvalues in increasing order.
pub fn eigenvalues(problem: &Problem, count: usize, opts: &SolverOptions) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("eigenvalue count must be at least 1".into()));
    }
    let l = problem.half_index_sum();
    let two_b = 2.0 * problem.sigma() / PI;
    let floor = spectral_floor(problem, opts)?;
    let first_crossover = (3.0 + l).ceil().max(0.0) as usize;
    let mut last_err = None;
    for attempt in 0..8 {
        let crossover = first_crossover + 2 * attempt;
        let dt = 0.05 / (1 << attempt.min(3)) as f64;
        match eigenvalues_with(problem, count, opts, floor, crossover, l, two_b, dt) {
            Ok(v) => return Ok(v),
            Err(e @ (Error::BracketFailure { .. } | Error::MissedRoot { .. })) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NumericalFailure("eigenvalue search failed".into())))
}

#[allow(clippy::too_many_arguments)]
fn eigenvalues_with(
    problem: &Problem,
    count: usize,
    opts: &SolverOptions,
    floor: f64,
    crossover: usize,
    l: f64,
    two_b: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    let edge = |n: usize| {
        let m = n as f64 - l - 0.5;
        m * m + two_b
    };
    let top = edge(crossover);
    if top <= floor {
        return Err(Error::MissedRoot {
            expected: crossover,
            found: 0,
            lo: floor,
            hi: top,
        });
    }
    let nodes = scan_nodes(problem, floor, top, dt);
    let signs: Vec<f64> = nodes
        .par_iter()
        .map(|&x| chi_sign(problem, x, opts))
        .collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    let mut prev = (floor, -1.0);
    for (&x, &s) in nodes.iter().zip(&signs) {
        if s == 0.0 {
            brackets.push((x, x));
            prev = (x, -prev.1);
            continue;
        }
        if s != prev.1 {
            brackets.push((prev.0, x));
        }
        prev = (x, s);
    }
    if brackets.len() != crossover {
        return Err(Error::MissedRoot {
            expected: crossover,
            found: brackets.len(),
            lo: floor,
            hi: top,
        });
    }
    // asymptotic brackets beyond the scanned region
    let edges: Vec<f64> = (crossover..=count.max(crossover)).map(edge).collect();
    let edge_signs: Vec<f64> = edges
        .par_iter()
        .map(|&x| chi_sign(problem, x, opts))
        .collect::<Result<_>>()?;
    if edge_signs[0] != prev.1 {
        return Err(Error::MissedRoot {
            expected: crossover,
            found: brackets.len() + 1,
            lo: floor,
            hi: top,
        });
    }
    for i in 0..edges.len() - 1 {
        if edge_signs[i] == edge_signs[i + 1] || edge_signs[i] == 0.0 {
            return Err(Error::BracketFailure {
                n: crossover + i,
                lo: edges[i],
                hi: edges[i + 1],
            });
        }
        brackets.push((edges[i], edges[i + 1]));
    }
    brackets.truncate(count);
    brackets
        .par_iter()
        .map(|&(lo, hi)| if lo == hi { Ok(lo) } else { polish(problem, lo, hi, opts) })
        .collect()
}

/// Least-squares `beta` in `(psi, psi'/k) = beta (phi, phi'/k)` at one abscissa.
fn ratio_at(p: &ode::MatchPoint, kappa2: f64) -> Scaled {
    let (a, da, la) = p.phi;
    let (b, db, lb) = p.psi;
    let num = b * a + db * da / kappa2;
    let den = a * a + da * da / kappa2;
    Scaled::new(num / den, lb - la)
}

/// `beta_n` with `psi(., lambda_n) = beta_n phi(., lambda_n)`, measured at
/// `pi/2` and cross-checked at `pi/3`.
pub fn beta_scaled(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<Scaled> {
    let xs = [PI / 3.0, PI / 2.0];
    let pts = ode::solutions_at(problem, lambda, &xs, opts)?;
    let kappa2 = |x: f64| (lambda - problem.q.value(x) - problem.singular_part(x)).abs().max(1.0);
    let first = ratio_at(&pts[1], kappa2(xs[1]));
    let second = ratio_at(&pts[0], kappa2(xs[0]));
    let rel = (first.relative_to(first.log) - second.relative_to(first.log)).abs()
        / first.mantissa.abs();
    if !(rel <= 1e-4) {
        return Err(Error::NotAnEigenvalue {
            lambda,
            first: first.value(),
            second: second.value(),
        });
    }
    Ok(first)
}

pub fn beta(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<f64> {
    Ok(beta_scaled(problem, lambda, opts)?.value())
}

/// `gamma_n = chi'(lambda_n) / beta_n` for each given eigenvalue.
pub fn norming_constants(problem: &Problem, lambdas: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
    Ok(betas_and_gammas(problem, lambdas, opts)?.1)
}

fn betas_and_gammas(problem: &Problem, lambdas: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let pairs: Vec<(f64, f64)> = lambdas
        .par_iter()
        .enumerate()
        .map(|(n, &l)| {
            let b = beta_scaled(problem, l, opts)?;
            let d = ode::char_derivative(problem, l, opts)?;
            let g = d.div(&b).value();
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::NonPositiveGamma { n, gamma: g });
            }
            Ok((b.value(), g))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

pub fn spectral_data(problem: &Problem, count: usize, opts: &SolverOptions) -> Result<SpectralData> {
    let lambdas = eigenvalues(problem, count, opts)?;
    let (betas, gammas) = betas_and_gammas(problem, &lambdas, opts)?;
    Ok(SpectralData {
        lambdas,
        gammas,
        betas,
        ind_f: problem.left.index(),
        ind_right: problem.right.index(),
    })
}

/// `int_0^pi phi(x, lambda_n)^2 dx` for problems without eigenparameter
/// dependence, using `phi` on the left half and `psi / beta` on the right half.
pub fn norming_integral_check(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<f64> {
    if problem.left.index() >= 1 || problem.right.index() >= 1 {
        return Err(Error::Unsupported(
            "norming integral needs boundary objects of index <= 0".into(),
        ));
    }
    let beta = beta_scaled(problem, lambda, opts)?;
    let n = 2048;
    let h = PI / n as f64;
    let interior: Vec<f64> = (1..n).map(|i| i as f64 * h).collect();
    let pts = ode::solutions_at(problem, lambda, &interior, opts)?;
    let endpoint = |obj: &crate::herglotz::BoundaryObject| match obj {
        crate::herglotz::BoundaryObject::Hn(_) => obj.up_down(lambda).1,
        crate::herglotz::BoundaryObject::Inf(_) => 0.0,
    };
    let mut values = Vec::with_capacity(n + 1);
    values.push(endpoint(&problem.left).powi(2));
    for p in &pts {
        let v = if p.x <= PI / 2.0 {
            Scaled::new(p.phi.0, p.phi.2)
        } else {
            Scaled::new(p.psi.0, p.psi.2).div(&beta)
        };
        values.push(v.value().powi(2));
    }
    values.push((endpoint(&problem.right) / beta.value()).powi(2));
    Ok(simpson(&values, h))
}

/// The truncated product for `chi(lambda)` built from the eigenvalues
/// `lambdas[0..]`, with the tail replaced by its asymptotic limit.
pub fn product_representation(lambdas: &[f64], l: f64, two_b: f64, lambda: f64) -> Scaled {
    let fl = l.floor();
    let mut sign = -1.0;
    let mut log = if l == fl { PI.ln() } else { 0.0 };
    let mut n = fl as i64 + 1;
    while n <= -1 {
        log -= 2.0 * (n as f64 - l).abs().ln();
        n += 1;
    }
    let acc = |v: f64, sign: &mut f64, log: &mut f64| {
        *sign *= v.signum();
        *log += v.abs().ln();
    };
    let m = lambdas.len() as i64 - 1;
    for (i, &ln) in lambdas.iter().enumerate() {
        let i = i as i64;
        acc(ln - lambda, &mut sign, &mut log);
        if i >= (fl as i64 + 1).max(0) {
            log -= 2.0 * (i as f64 - l).abs().ln();
        }
    }
    let tail_start = (m + 1).max(fl as i64 + 1) as f64;
    log += (two_b - lambda) * inverse_square_tail(tail_start - l);
    Scaled::new(sign, log)
}

/// Ratio of the truncated product representation to the directly computed
/// characteristic function at `lambda`, using `truncation + 1` eigenvalues.
pub fn product_representation_check(
    problem: &Problem,
    lambda: f64,
    truncation: usize,
    opts: &SolverOptions,
) -> Result<f64> {
    let lambdas = eigenvalues(problem, truncation + 1, opts)?;
    product_ratio_with(problem, &lambdas, lambda, opts)
}

pub fn product_ratio_with(problem: &Problem, lambdas: &[f64], lambda: f64, opts: &SolverOptions) -> Result<f64> {
    if lambdas.len() < 51 {
        return Err(Error::InsufficientData {
            needed: 51,
            got: lambdas.len(),
        });
    }
    let prod = product_representation(
        lambdas,
        problem.half_index_sum(),
        2.0 * problem.sigma() / PI,
        lambda,
    );
    let chi = ode::char_function(problem, lambda, opts)?;
    Ok(prod.div(&chi).value())
}
