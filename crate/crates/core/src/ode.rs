//! Regular solutions and the characteristic function.
//!
//! Solutions are integrated with the Dormand-Prince 5(4) pair. Values are kept
//! as mantissa/exponent pairs: whenever the state leaves `[2^-27, 2^27]` it is
//! rescaled by an exact power of two and the exponent moves to `logscale`.

use crate::error::{Error, Result};
use crate::herglotz::BoundaryObject;
use crate::numeric::{pow2, split_pow2, Scaled};
use crate::problem::Problem;
use std::f64::consts::{LN_2, PI};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Distance from a singular endpoint (`l >= 1`) where integration starts.
    pub start_offset: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 5_000_000,
            start_offset: 1e-4 * PI,
        }
    }
}

impl SolverOptions {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self.atol = rtol * 1e-2;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Samples of a solution; the true values are `y * exp(logscale)` and `dy * exp(logscale)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTrace {
    pub side: Side,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    pub logscale: Vec<f64>,
}

impl SolutionTrace {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        Scaled::new(self.y[i], self.logscale[i]).value()
    }

    pub fn derivative(&self, i: usize) -> f64 {
        Scaled::new(self.dy[i], self.logscale[i]).value()
    }

    pub fn log_derivative(&self, i: usize) -> f64 {
        self.dy[i] / self.y[i]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,dy,logscale\n");
        for i in 0..self.len() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.grid[i], self.y[i], self.dy[i], self.logscale[i]
            ));
        }
        s
    }
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    y: f64,
    dy: f64,
    log: f64,
}

/// `V(x) - lambda` for the first-order system `y'' = (V - lambda) y`.
struct Coefficient<'a> {
    problem: &'a Problem,
    left: f64,
    right: f64,
    lambda: f64,
}

impl<'a> Coefficient<'a> {
    fn new(problem: &'a Problem, lambda: f64) -> Self {
        let w = |b: &BoundaryObject| {
            let l = b.ell() as f64;
            if l > 0.0 {
                l * (l + 1.0)
            } else {
                0.0
            }
        };
        Coefficient {
            problem,
            left: w(&problem.left),
            right: w(&problem.right),
            lambda,
        }
    }

    #[inline]
    fn at(&self, x: f64) -> f64 {
        let mut v = self.problem.q.value(x) - self.lambda;
        if self.left > 0.0 {
            v += self.left / (x * x);
        }
        if self.right > 0.0 {
            let s = PI - x;
            v += self.right / (s * s);
        }
        v
    }

    /// The coefficient without the singular term belonging to `side`.
    fn regular_part(&self, side: Side, x: f64) -> f64 {
        let mut v = self.problem.q.value(x) - self.lambda;
        match side {
            Side::Left if self.right > 0.0 => v += self.right / ((PI - x) * (PI - x)),
            Side::Right if self.left > 0.0 => v += self.left / (x * x),
            _ => {}
        }
        v
    }
}

/// Power series `s^(l+1) sum a_j s^(2j)` solving `y'' = (l(l+1)/s^2 + c) y`,
/// normalized so that `y ~ s^(l+1) / (2l+1)!!`.
struct Frobenius {
    ell: f64,
    coeffs: Vec<f64>,
    log_lead: f64,
}

impl Frobenius {
    fn new(ell: u32, c: f64, s_max: f64) -> Self {
        let l = ell as f64;
        let log_lead = -(0..=ell).map(|k| (2.0 * k as f64 + 1.0).ln()).sum::<f64>();
        let mut coeffs = vec![1.0];
        let s2 = s_max * s_max;
        let mut term = 1.0f64;
        for j in 1..200 {
            let jf = j as f64;
            let a = coeffs[j - 1] * c / (2.0 * jf * (2.0 * jf + 2.0 * l + 1.0));
            coeffs.push(a);
            term *= s2;
            if (a * term).abs() < 1e-18 {
                break;
            }
        }
        Frobenius {
            ell: l,
            coeffs,
            log_lead,
        }
    }

    /// `(y, dy/ds)` at `s` as mantissas sharing one exponent.
    fn eval(&self, s: f64) -> Sample {
        let s2 = s * s;
        let mut p = 1.0;
        let mut y = 0.0;
        let mut dy = 0.0;
        for (j, a) in self.coeffs.iter().enumerate() {
            y += a * p;
            dy += (self.ell + 1.0 + 2.0 * j as f64) * a * p;
            p *= s2;
        }
        Sample {
            y,
            dy: dy / s,
            log: self.log_lead + (self.ell + 1.0) * s.ln(),
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

#[inline]
fn rhs(c: f64, s: &State) -> State {
    [s[1], c * s[0]]
}

#[inline]
fn axpy(s: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *s;
    for (w, k) in terms {
        out[0] += h * w * k[0];
        out[1] += h * w * k[1];
    }
    out
}

/// One Dormand-Prince step; returns the new state, its derivative and the error estimate.
#[inline]
fn dp_step(coef: &Coefficient, x: f64, s: &State, k1: &State, h: f64) -> (State, State, State) {
    let k2 = rhs(coef.at(x + C2 * h), &axpy(s, h, &[(A21, k1)]));
    let k3 = rhs(coef.at(x + C3 * h), &axpy(s, h, &[(A31, k1), (A32, &k2)]));
    let k4 = rhs(
        coef.at(x + C4 * h),
        &axpy(s, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    );
    let k5 = rhs(
        coef.at(x + C5 * h),
        &axpy(s, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let xn = x + h;
    let cn = coef.at(xn);
    let k6 = rhs(
        cn,
        &axpy(s, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let ynew = axpy(s, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = rhs(cn, &ynew);
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (ynew, k7, err)
}

enum Mesh<'m> {
    /// Choose steps adaptively and record the accepted nodes.
    Record(&'m mut Vec<f64>),
    /// Reuse previously recorded nodes.
    Replay(&'m [f64]),
}

/// Integrates from `x0` through `targets` (ordered in the marching direction).
fn march(
    coef: &Coefficient,
    x0: f64,
    start: Sample,
    targets: &[f64],
    opts: &SolverOptions,
    mesh: Mesh,
) -> Result<Vec<Sample>> {
    let mut out = Vec::with_capacity(targets.len());
    let mut x = x0;
    let mut s = [start.y, start.dy];
    let mut log = start.log;
    renormalize(&mut s, &mut log);
    let mut k1 = rhs(coef.at(x), &s);
    let check = |s: &State, x: f64| -> Result<()> {
        if s[0].is_finite() && s[1].is_finite() {
            Ok(())
        } else {
            Err(Error::NumericalFailure(format!(
                "non-finite solution at x = {x} (lambda = {})",
                coef.lambda
            )))
        }
    };
    match mesh {
        Mesh::Replay(nodes) => {
            let mut ti = 0;
            while ti < targets.len() && targets[ti] == x {
                out.push(Sample { y: s[0], dy: s[1], log });
                ti += 1;
            }
            for &node in nodes {
                let h = node - x;
                let (ynew, knew, _) = dp_step(coef, x, &s, &k1, h);
                x = node;
                s = ynew;
                k1 = knew;
                check(&s, x)?;
                if renormalize(&mut s, &mut log) {
                    k1 = rhs(coef.at(x), &s);
                }
                while ti < targets.len() && targets[ti] == x {
                    out.push(Sample { y: s[0], dy: s[1], log });
                    ti += 1;
                }
            }
            if ti != targets.len() {
                return Err(Error::NumericalFailure("replayed mesh misses a target".into()));
            }
        }
        Mesh::Record(nodes) => {
            let mut h = 0.05 / (1.0 + k1_scale(coef.at(x)));
            let mut steps = 0usize;
            for &t in targets {
                let dir = (t - x).signum();
                while x != t {
                    let remaining = t - x;
                    let mut hh = h.abs().min(remaining.abs()) * dir;
                    let last = (remaining - hh).abs() <= 1e-12 * remaining.abs().max(1e-300)
                        || hh.abs() >= remaining.abs();
                    if last {
                        hh = remaining;
                    }
                    let (ynew, knew, err) = dp_step(coef, x, &s, &k1, hh);
                    let mut norm = 0.0;
                    for i in 0..2 {
                        let sc = opts.atol + opts.rtol * s[i].abs().max(ynew[i].abs());
                        norm += (err[i] / sc) * (err[i] / sc);
                    }
                    let norm = (norm / 2.0).sqrt();
                    steps += 1;
                    if steps > opts.max_steps {
                        return Err(Error::NumericalFailure(format!(
                            "step limit exceeded near x = {x} (lambda = {})",
                            coef.lambda
                        )));
                    }
                    if !norm.is_finite() {
                        h = hh.abs() * 0.1;
                        if h < 1e-14 {
                            return Err(Error::NumericalFailure(format!(
                                "step size underflow at x = {x}"
                            )));
                        }
                        continue;
                    }
                    let factor = (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0);
                    if norm <= 1.0 {
                        x = if last { t } else { x + hh };
                        s = ynew;
                        k1 = knew;
                        check(&s, x)?;
                        nodes.push(x);
                        if renormalize(&mut s, &mut log) {
                            k1 = rhs(coef.at(x), &s);
                        }
                        // a short final step does not shrink the next one
                        if !last {
                            h = hh.abs() * factor;
                        } else {
                            h = h.max(hh.abs() * factor);
                        }
                    } else {
                        h = hh.abs() * factor.min(1.0);
                        if h < 1e-15 * x.abs().max(1.0) {
                            return Err(Error::NumericalFailure(format!(
                                "step size underflow at x = {x}"
                            )));
                        }
                    }
                }
                out.push(Sample { y: s[0], dy: s[1], log });
            }
        }
    }
    Ok(out)
}

fn k1_scale(c: f64) -> f64 {
    c.abs().sqrt()
}

fn renormalize(s: &mut State, log: &mut f64) -> bool {
    let m = s[0].abs().max(s[1].abs());
    const HI: f64 = 134_217_728.0; // 2^27
    const LO: f64 = 1.0 / 134_217_728.0;
    if m > HI || (m < LO && m > 0.0) {
        let (_, k) = split_pow2(m);
        let f = pow2(-k);
        s[0] *= f;
        s[1] *= f;
        *log += k as f64 * LN_2;
        true
    } else {
        false
    }
}

/// Start data of a regular solution in the local coordinate `s` (distance from
/// the starting endpoint): the start offset, a sampler for `s <= offset`, and
/// `(y, dy/ds)` at the offset.
struct StartData {
    offset: f64,
    series: Option<Frobenius>,
    at_offset: Sample,
}

fn start_data(problem: &Problem, side: Side, coef: &Coefficient, opts: &SolverOptions) -> StartData {
    let obj = match side {
        Side::Left => &problem.left,
        Side::Right => &problem.right,
    };
    match obj {
        BoundaryObject::Hn(_) => {
            let (up, down) = obj.up_down(coef.lambda);
            StartData {
                offset: 0.0,
                series: None,
                at_offset: Sample {
                    y: down,
                    dy: -up,
                    log: 0.0,
                },
            }
        }
        BoundaryObject::Inf(0) => StartData {
            offset: 0.0,
            series: None,
            at_offset: Sample {
                y: 0.0,
                dy: 1.0,
                log: 0.0,
            },
        },
        BoundaryObject::Inf(n) => {
            let eps = opts.start_offset;
            let x = match side {
                Side::Left => eps,
                Side::Right => PI - eps,
            };
            let series = Frobenius::new(*n, coef.regular_part(side, x), eps);
            let at_offset = series.eval(eps);
            StartData {
                offset: eps,
                series: Some(series),
                at_offset,
            }
        }
    }
}

/// Converts local `(y, dy/ds)` to `(y, dy/dx)`.
fn to_global(side: Side, s: Sample) -> Sample {
    match side {
        Side::Left => s,
        Side::Right => Sample {
            y: s.y,
            dy: -s.dy,
            log: s.log,
        },
    }
}

fn local_to_x(side: Side, s: f64) -> f64 {
    match side {
        Side::Left => s,
        Side::Right => PI - s,
    }
}

/// Integrates the regular solution of `side` to the given abscissae.
/// `xs` must be ordered in the marching direction (ascending for the left
/// solution, descending for the right one).
fn solve_side(
    problem: &Problem,
    side: Side,
    lambda: f64,
    xs: &[f64],
    opts: &SolverOptions,
    mesh: Mesh,
) -> Result<Vec<Sample>> {
    let coef = Coefficient::new(problem, lambda);
    let start = start_data(problem, side, &coef, opts);
    let dist = |x: f64| match side {
        Side::Left => x,
        Side::Right => PI - x,
    };
    let split = xs.partition_point(|&x| dist(x) <= start.offset);
    let mut out = Vec::with_capacity(xs.len());
    for &x in &xs[..split] {
        let series = start.series.as_ref().ok_or(Error::OutOfDomain { x })?;
        out.push(to_global(side, series.eval(dist(x))));
    }
    let x0 = local_to_x(side, start.offset);
    let rest = march(
        &coef,
        x0,
        to_global(side, start.at_offset),
        &xs[split..],
        opts,
        mesh,
    )?;
    out.extend(rest);
    Ok(out)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if let Some(&x) = grid.iter().find(|&&x| !(x > 0.0 && x < PI)) {
        return Err(Error::OutOfDomain { x });
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    Ok(())
}

fn into_trace(side: Side, lambda: f64, grid: &[f64], samples: Vec<Sample>) -> SolutionTrace {
    SolutionTrace {
        side,
        lambda,
        grid: grid.to_vec(),
        y: samples.iter().map(|s| s.y).collect(),
        dy: samples.iter().map(|s| s.dy).collect(),
        logscale: samples.iter().map(|s| s.log).collect(),
    }
}

/// The left regular solution `phi(., lambda)` sampled on an increasing grid in `(0, pi)`.
pub fn left_regular(problem: &Problem, lambda: f64, grid: &[f64], opts: &SolverOptions) -> Result<SolutionTrace> {
    check_grid(grid)?;
    let mut nodes = Vec::new();
    let samples = solve_side(problem, Side::Left, lambda, grid, opts, Mesh::Record(&mut nodes))?;
    Ok(into_trace(Side::Left, lambda, grid, samples))
}

/// The right regular solution `psi(., lambda)` sampled on an increasing grid in `(0, pi)`.
pub fn right_regular(problem: &Problem, lambda: f64, grid: &[f64], opts: &SolverOptions) -> Result<SolutionTrace> {
    check_grid(grid)?;
    let rev: Vec<f64> = grid.iter().rev().copied().collect();
    let mut nodes = Vec::new();
    let mut samples = solve_side(problem, Side::Right, lambda, &rev, opts, Mesh::Record(&mut nodes))?;
    samples.reverse();
    Ok(into_trace(Side::Right, lambda, grid, samples))
}

/// Samples `(y, dy/dx, log)` of one regular solution at abscissae given in
/// marching order. The far endpoint is admitted when it carries no singular
/// term, which is how boundary values of the opposite solution are obtained.
pub(crate) fn regular_samples(
    problem: &Problem,
    side: Side,
    lambda: f64,
    xs: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<(f64, f64, f64)>> {
    if let Some(&x) = xs.iter().find(|&&x| !(0.0..=PI).contains(&x)) {
        return Err(Error::OutOfDomain { x });
    }
    let mut nodes = Vec::new();
    let samples = solve_side(problem, side, lambda, xs, opts, Mesh::Record(&mut nodes))?;
    Ok(samples.into_iter().map(|s| (s.y, s.dy, s.log)).collect())
}

/// Default sampling grid: 513 uniform interior points, four times denser
/// within `0.05 pi` of an endpoint carrying a singularity.
pub fn default_grid(problem: &Problem) -> Vec<f64> {
    let n = 514;
    let h = PI / n as f64;
    let zone = 0.05 * PI;
    let dense_left = problem.left.ell() >= 1;
    let dense_right = problem.right.ell() >= 1;
    let mut grid = Vec::new();
    for i in 0..n {
        for sub in 0..4 {
            let x = (i as f64 + sub as f64 / 4.0) * h;
            if x <= 0.0 {
                continue;
            }
            let keep = sub == 0
                || (dense_left && x < zone)
                || (dense_right && x > PI - zone - h);
            if keep && x < PI {
                grid.push(x);
            }
        }
    }
    grid
}

/// `(phi, phi')` and `(psi, psi')` at a common abscissa.
#[derive(Clone, Copy, Debug)]
pub struct MatchPoint {
    pub x: f64,
    pub phi: (f64, f64, f64),
    pub psi: (f64, f64, f64),
}

impl MatchPoint {
    pub fn wronskian(&self) -> Scaled {
        let (p, dp, lp) = self.phi;
        let (s, ds, ls) = self.psi;
        Scaled::new(p * ds - dp * s, lp + ls)
    }
}

/// Integrates both regular solutions to the given abscissae; the meshes are
/// recorded (when `meshes` is empty) or replayed.
fn match_points(
    problem: &Problem,
    lambda: f64,
    xs: &[f64],
    opts: &SolverOptions,
    meshes: Option<&(Vec<f64>, Vec<f64>)>,
) -> Result<(Vec<MatchPoint>, (Vec<f64>, Vec<f64>))> {
    let mut asc = xs.to_vec();
    asc.sort_by(f64::total_cmp);
    let desc: Vec<f64> = asc.iter().rev().copied().collect();
    let mut left_nodes = Vec::new();
    let mut right_nodes = Vec::new();
    let (l, r) = match meshes {
        Some((lm, rm)) => (
            solve_side(problem, Side::Left, lambda, &asc, opts, Mesh::Replay(lm))?,
            solve_side(problem, Side::Right, lambda, &desc, opts, Mesh::Replay(rm))?,
        ),
        None => (
            solve_side(problem, Side::Left, lambda, &asc, opts, Mesh::Record(&mut left_nodes))?,
            solve_side(problem, Side::Right, lambda, &desc, opts, Mesh::Record(&mut right_nodes))?,
        ),
    };
    let n = asc.len();
    let points = (0..n)
        .map(|i| MatchPoint {
            x: asc[i],
            phi: (l[i].y, l[i].dy, l[i].log),
            psi: (r[n - 1 - i].y, r[n - 1 - i].dy, r[n - 1 - i].log),
        })
        .collect();
    Ok((points, (left_nodes, right_nodes)))
}

/// Both solutions at the given abscissae (sorted ascending in the result).
pub fn solutions_at(problem: &Problem, lambda: f64, xs: &[f64], opts: &SolverOptions) -> Result<Vec<MatchPoint>> {
    Ok(match_points(problem, lambda, xs, opts, None)?.0)
}

/// `chi(lambda) = phi psi' - phi' psi`, evaluated at `x = pi/2`.
pub fn char_function(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<Scaled> {
    char_function_at(problem, lambda, PI / 2.0, opts)
}

pub fn char_function_at(problem: &Problem, lambda: f64, x: f64, opts: &SolverOptions) -> Result<Scaled> {
    if !(x > 0.0 && x < PI) {
        return Err(Error::OutOfDomain { x });
    }
    let (pts, _) = match_points(problem, lambda, &[x], opts, None)?;
    Ok(pts[0].wronskian())
}

/// `d chi / d lambda` by central differences with one Richardson step, all
/// evaluations sharing the integration mesh chosen at `lambda`.
pub fn char_derivative(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<Scaled> {
    let x = [PI / 2.0];
    let (base, meshes) = match_points(problem, lambda, &x, opts, None)?;
    let reference = base[0].wronskian().log;
    let h = 1e-5f64.max(1e-7 * lambda.abs());
    let chi = |l: f64| -> Result<f64> {
        let (p, _) = match_points(problem, l, &x, opts, Some(&meshes))?;
        Ok(p[0].wronskian().relative_to(reference))
    };
    let d1 = (chi(lambda + h)? - chi(lambda - h)?) / (2.0 * h);
    let d2 = (chi(lambda + h / 2.0)? - chi(lambda - h / 2.0)?) / h;
    Ok(Scaled::new((4.0 * d2 - d1) / 3.0, reference))
}
