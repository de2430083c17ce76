//! Rational Herglotz-Nevanlinna functions, singularity symbols and the
//! endpoint maps `theta_hat` / `theta_tilde`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Real polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    /// `a + b * lambda`
    pub fn linear(a: f64, b: f64) -> Self {
        Poly(vec![a, b])
    }

    /// Drops trailing zero coefficients, keeping at least the constant term.
    pub fn trimmed(mut self) -> Poly {
        while self.0.len() > 1 && self.0[self.0.len() - 1] == 0.0 {
            self.0.pop();
        }
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn degree(&self) -> usize {
        self.0
            .iter()
            .rposition(|c| *c != 0.0)
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&0.0) + other.0.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    /// Synthetic division by `(lambda - mu)`; returns quotient and remainder.
    pub fn divide_linear(&self, mu: f64) -> (Poly, f64) {
        let n = self.0.len();
        if n <= 1 {
            return (Poly::constant(0.0), self.0.first().copied().unwrap_or(0.0));
        }
        let mut q = vec![0.0; n - 1];
        let mut carry = self.0[n - 1];
        for i in (0..n - 1).rev() {
            q[i] = carry;
            carry = self.0[i] + carry * mu;
        }
        (Poly(q), carry)
    }
}

/// The pair `(up, down)` with `f = up / down`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyPair {
    pub up: Poly,
    pub down: Poly,
}

impl PolyPair {
    pub fn eval(&self, lambda: f64) -> (f64, f64) {
        (self.up.eval(lambda), self.down.eval(lambda))
    }
}

/// `h0 * lambda + h + sum residues[k] / (poles[k] - lambda)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalHN {
    h0: f64,
    h: f64,
    poles: Vec<f64>,
    residues: Vec<f64>,
}

impl RationalHN {
    pub fn new(h0: f64, h: f64, poles: Vec<f64>, residues: Vec<f64>) -> Result<Self> {
        if !(h0.is_finite() && h.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        if h0 < 0.0 {
            return Err(Error::InvalidInput(format!("h0 = {h0} must be nonnegative")));
        }
        if poles.len() != residues.len() {
            return Err(Error::InvalidInput(
                "poles and residues must have equal length".into(),
            ));
        }
        if residues.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidInput("residues must be positive".into()));
        }
        if poles.iter().any(|p| !p.is_finite()) || poles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "poles must be finite and strictly increasing".into(),
            ));
        }
        Ok(RationalHN {
            h0,
            h,
            poles,
            residues,
        })
    }

    pub fn constant(h: f64) -> Self {
        RationalHN {
            h0: 0.0,
            h,
            poles: vec![],
            residues: vec![],
        }
    }

    pub fn affine(h0: f64, h: f64) -> Result<Self> {
        RationalHN::new(h0, h, vec![], vec![])
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn residues(&self) -> &[f64] {
        &self.residues
    }

    pub fn degree(&self) -> usize {
        self.poles.len()
    }

    pub fn index(&self) -> i64 {
        let d = 2 * self.poles.len() as i64;
        if self.h0 > 0.0 {
            d + 1
        } else {
            d
        }
    }

    pub fn evaluate(&self, lambda: f64) -> Result<f64> {
        for &p in &self.poles {
            if (lambda - p).abs() <= 1e-14 * p.abs().max(1.0) {
                return Err(Error::PoleEvaluation { pole: p });
            }
        }
        Ok(self.eval_unchecked(lambda))
    }

    pub(crate) fn eval_unchecked(&self, lambda: f64) -> f64 {
        let mut s = self.h0 * lambda + self.h;
        for (p, d) in self.poles.iter().zip(&self.residues) {
            s += d / (p - lambda);
        }
        s
    }

    pub fn derivative(&self, lambda: f64) -> f64 {
        let mut s = self.h0;
        for (p, d) in self.poles.iter().zip(&self.residues) {
            s += d / ((p - lambda) * (p - lambda));
        }
        s
    }

    /// `h0' * prod (h_k - lambda)`, with `h0' = 1/h0` when `h0 > 0` and 1 otherwise.
    pub fn down(&self) -> Poly {
        let lead = if self.h0 > 0.0 { 1.0 / self.h0 } else { 1.0 };
        self.poles
            .iter()
            .fold(Poly::constant(lead), |acc, &p| acc.mul(&Poly::linear(p, -1.0)))
    }

    pub fn poly_pair(&self) -> PolyPair {
        let down = self.down();
        let lead = if self.h0 > 0.0 { 1.0 / self.h0 } else { 1.0 };
        let mut up = down.mul(&Poly::linear(self.h, self.h0));
        for k in 0..self.poles.len() {
            let mut term = Poly::constant(lead * self.residues[k]);
            for (j, &p) in self.poles.iter().enumerate() {
                if j != k {
                    term = term.mul(&Poly::linear(p, -1.0));
                }
            }
            up = up.add(&term);
        }
        PolyPair {
            up: up.trimmed(),
            down: down.trimmed(),
        }
    }
}

/// An element of the boundary set: a rational Herglotz-Nevanlinna function or
/// the symbol `Inf(n)` (Dirichlet for `n = 0`, otherwise the singularity
/// `n (n + 1) / x^2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundaryRepr", into = "BoundaryRepr")]
pub enum BoundaryObject {
    Hn(RationalHN),
    Inf(u32),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum BoundaryRepr {
    Hn {
        #[serde(default)]
        h0: f64,
        #[serde(default)]
        h: f64,
        #[serde(default)]
        poles: Vec<f64>,
        #[serde(default)]
        residues: Vec<f64>,
    },
    Inf {
        n: u32,
    },
}

impl TryFrom<BoundaryRepr> for BoundaryObject {
    type Error = Error;
    fn try_from(r: BoundaryRepr) -> Result<Self> {
        match r {
            BoundaryRepr::Hn {
                h0,
                h,
                poles,
                residues,
            } => Ok(BoundaryObject::Hn(RationalHN::new(h0, h, poles, residues)?)),
            BoundaryRepr::Inf { n } => Ok(BoundaryObject::Inf(n)),
        }
    }
}

impl From<BoundaryObject> for BoundaryRepr {
    fn from(b: BoundaryObject) -> Self {
        match b {
            BoundaryObject::Hn(f) => BoundaryRepr::Hn {
                h0: f.h0,
                h: f.h,
                poles: f.poles,
                residues: f.residues,
            },
            BoundaryObject::Inf(n) => BoundaryRepr::Inf { n },
        }
    }
}

impl fmt::Display for BoundaryObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryObject::Inf(n) => write!(f, "inf_{n}"),
            BoundaryObject::Hn(g) => {
                write!(f, "{}*l + {}", g.h0, g.h)?;
                for (p, d) in g.poles.iter().zip(&g.residues) {
                    write!(f, " + {d}/({p} - l)")?;
                }
                Ok(())
            }
        }
    }
}

impl BoundaryObject {
    pub fn dirichlet() -> Self {
        BoundaryObject::Inf(0)
    }

    pub fn neumann() -> Self {
        BoundaryObject::Hn(RationalHN::constant(0.0))
    }

    pub fn robin(h: f64) -> Self {
        BoundaryObject::Hn(RationalHN::constant(h))
    }

    pub fn index(&self) -> i64 {
        match self {
            BoundaryObject::Hn(f) => f.index(),
            BoundaryObject::Inf(n) => -(*n as i64) - 1,
        }
    }

    pub fn ell(&self) -> i64 {
        -1 - self.index().min(0)
    }

    pub fn as_hn(&self) -> Option<&RationalHN> {
        match self {
            BoundaryObject::Hn(f) => Some(f),
            BoundaryObject::Inf(_) => None,
        }
    }

    pub fn smallest_pole(&self) -> f64 {
        match self {
            BoundaryObject::Hn(f) => f.poles.first().copied().unwrap_or(f64::INFINITY),
            BoundaryObject::Inf(_) => f64::INFINITY,
        }
    }

    pub fn pole_count_upto(&self, lambda: f64) -> usize {
        match self {
            BoundaryObject::Hn(f) => f.poles.iter().filter(|&&p| p <= lambda).count(),
            BoundaryObject::Inf(_) => 0,
        }
    }

    /// The pair `(omega_1, omega_2)` entering the eigenvalue asymptotics and trace.
    pub fn omega(&self) -> (f64, f64) {
        use std::f64::consts::PI;
        let ind = self.index();
        match self {
            BoundaryObject::Hn(f) => {
                let pole_sum: f64 = f.poles.iter().sum();
                if ind % 2 == 1 {
                    (1.0 / f.h0, f.h / f.h0 - pole_sum)
                } else {
                    (-f.h, -pole_sum)
                }
            }
            BoundaryObject::Inf(_) => {
                let l = self.ell() as f64;
                let w = l * (l + 1.0);
                (-w / (2.0 * PI), -w * w / (8.0 * PI * PI))
            }
        }
    }

    /// Boundary polynomials `(f_up, f_down)` at `lambda`; `(1, 0)` for every symbol,
    /// which is the Dirichlet initial data.
    pub fn up_down(&self, lambda: f64) -> (f64, f64) {
        match self {
            BoundaryObject::Hn(f) => f.poly_pair().eval(lambda),
            BoundaryObject::Inf(_) => (1.0, 0.0),
        }
    }

    pub fn theta_hat(&self, mu: f64) -> Result<BoundaryObject> {
        if !mu.is_finite() || mu >= self.smallest_pole() {
            return Err(Error::DomainViolation(format!(
                "theta_hat needs mu < smallest pole ({}), got {mu}",
                self.smallest_pole()
            )));
        }
        let f = match self {
            BoundaryObject::Hn(f) if f.index() >= 1 => f,
            _ => return Ok(BoundaryObject::Inf((-self.index()) as u32)),
        };
        // f(l) - f(mu) = (l - mu) G(l); the new poles are the zeros of G.
        let fmu = f.eval_unchecked(mu);
        let shifted: Vec<f64> = f
            .residues
            .iter()
            .zip(&f.poles)
            .map(|(d, p)| d / (p - mu))
            .collect();
        let g = |l: f64| -> f64 {
            let mut s = f.h0;
            for (c, p) in shifted.iter().zip(&f.poles) {
                s += c / (p - l);
            }
            s
        };
        let dg = |l: f64| -> f64 {
            let mut s = 0.0;
            for (c, p) in shifted.iter().zip(&f.poles) {
                s += c / ((p - l) * (p - l));
            }
            s
        };
        let mut intervals: Vec<(f64, f64)> = f.poles.windows(2).map(|w| (w[0], w[1])).collect();
        if f.h0 > 0.0 {
            if let Some(&last) = f.poles.last() {
                intervals.push((last, f64::INFINITY));
            }
        }
        let mut poles = Vec::with_capacity(intervals.len());
        let mut residues = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            let p = increasing_root(&g, lo, hi)?;
            poles.push(p);
            residues.push(1.0 / dg(p));
        }
        let h0 = if f.h0 > 0.0 { 0.0 } else { 1.0 / (fmu - f.h) };
        let at_mu = -1.0 / f.derivative(mu) - fmu;
        let h = at_mu - h0 * mu - sum_fractions(&poles, &residues, mu);
        Ok(BoundaryObject::Hn(RationalHN::new(h0, h, poles, residues)?))
    }

    pub fn theta_tilde(&self, mu: f64, tau: f64) -> Result<BoundaryObject> {
        if !mu.is_finite() || mu >= self.smallest_pole() {
            return Err(Error::DomainViolation(format!(
                "theta_tilde needs mu < smallest pole ({}), got {mu}",
                self.smallest_pole()
            )));
        }
        let f = match self {
            BoundaryObject::Hn(f) => f,
            BoundaryObject::Inf(0) => {
                if !tau.is_finite() {
                    return Err(Error::DomainViolation(
                        "theta_tilde of the Dirichlet symbol needs a finite tau".into(),
                    ));
                }
                return Ok(BoundaryObject::Hn(RationalHN::constant(-tau)));
            }
            BoundaryObject::Inf(n) => return Ok(BoundaryObject::Inf(n - 1)),
        };
        let fmu = f.eval_unchecked(mu);
        if !(tau > fmu) {
            return Err(Error::DomainViolation(format!(
                "theta_tilde needs tau > f(mu) = {fmu}, got {tau}"
            )));
        }
        let g = |l: f64| f.eval_unchecked(l) - tau;
        let mut intervals = Vec::new();
        match f.poles.first() {
            Some(&p1) => intervals.push((mu, p1)),
            None if f.h0 > 0.0 => intervals.push((mu, f64::INFINITY)),
            None => {}
        }
        intervals.extend(f.poles.windows(2).map(|w| (w[0], w[1])));
        if f.h0 > 0.0 {
            if let Some(&last) = f.poles.last() {
                intervals.push((last, f64::INFINITY));
            }
        }
        let mut poles = Vec::with_capacity(intervals.len());
        let mut residues = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            let p = increasing_root(&g, lo, hi)?;
            poles.push(p);
            residues.push((p - mu) / f.derivative(p));
        }
        let h0 = if f.h0 > 0.0 { 0.0 } else { 1.0 / (tau - f.h) };
        let h = -tau - h0 * mu - sum_fractions(&poles, &residues, mu);
        Ok(BoundaryObject::Hn(RationalHN::new(h0, h, poles, residues)?))
    }

    /// Componentwise comparison with absolute tolerance; symbols compare exactly.
    pub fn approx_eq(&self, other: &BoundaryObject, tol: f64) -> bool {
        match (self, other) {
            (BoundaryObject::Inf(a), BoundaryObject::Inf(b)) => a == b,
            (BoundaryObject::Hn(a), BoundaryObject::Hn(b)) => {
                a.poles.len() == b.poles.len()
                    && (a.h0 - b.h0).abs() <= tol
                    && (a.h - b.h).abs() <= tol
                    && a.poles.iter().zip(&b.poles).all(|(x, y)| (x - y).abs() <= tol)
                    && a
                        .residues
                        .iter()
                        .zip(&b.residues)
                        .all(|(x, y)| (x - y).abs() <= tol)
            }
            _ => false,
        }
    }

    /// Largest absolute coefficient difference, or infinity for structural mismatch.
    pub fn coefficient_distance(&self, other: &BoundaryObject) -> f64 {
        match (self, other) {
            (BoundaryObject::Inf(a), BoundaryObject::Inf(b)) if a == b => 0.0,
            (BoundaryObject::Hn(a), BoundaryObject::Hn(b)) if a.poles.len() == b.poles.len() => {
                let mut d = (a.h0 - b.h0).abs().max((a.h - b.h).abs());
                for i in 0..a.poles.len() {
                    d = d
                        .max((a.poles[i] - b.poles[i]).abs())
                        .max((a.residues[i] - b.residues[i]).abs());
                }
                d
            }
            _ => f64::INFINITY,
        }
    }
}

fn sum_fractions(poles: &[f64], residues: &[f64], at: f64) -> f64 {
    poles.iter().zip(residues).map(|(p, d)| d / (p - at)).sum()
}

/// Zero of a function increasing from `-inf` to `+inf` (or at least changing
/// sign from negative to positive) on the open interval `(lo, hi)`.
fn increasing_root<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> Result<f64> {
    let mut hi = hi;
    if hi.is_infinite() {
        let mut step = lo.abs().max(1.0);
        hi = lo + step;
        while g(hi) <= 0.0 {
            step *= 2.0;
            hi = lo + step;
            if !hi.is_finite() {
                return Err(Error::NumericalFailure(
                    "no root of a Herglotz equation above the last pole".into(),
                ));
            }
        }
    }
    let (mut a, mut b) = (lo, hi);
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let v = g(m);
        if v.is_nan() {
            return Err(Error::NumericalFailure("NaN in Herglotz root search".into()));
        }
        if v < 0.0 {
            a = m;
        } else if v > 0.0 {
            b = m;
        } else {
            return Ok(m);
        }
    }
    // pick the endpoint with the smaller residual, never a pole itself
    let fa = if a == lo { f64::INFINITY } else { g(a).abs() };
    let fb = if b == hi { f64::INFINITY } else { g(b).abs() };
    Ok(if fa <= fb { a } else { b })
}

/// The polynomial pair of `theta_hat(mu, f)` built directly from the pair of `f`.
/// Requires `ind f >= 1`.
pub fn lemma_hat_pair(f: &RationalHN, mu: f64) -> Result<PolyPair> {
    if f.index() < 1 {
        return Err(Error::DomainViolation("lemma pair needs ind f >= 1".into()));
    }
    let pair = f.poly_pair();
    let fmu = f.evaluate(mu)?;
    let up_num = pair
        .up
        .scale(-fmu)
        .add(&pair.down.mul(&Poly::linear(mu + fmu * fmu, -1.0)));
    let down_num = pair.up.add(&pair.down.scale(-fmu));
    let (up, _) = up_num.divide_linear(mu);
    let (down, _) = down_num.divide_linear(mu);
    Ok(PolyPair { up, down })
}

/// Remainders of the two synthetic divisions in [`lemma_hat_pair`], i.e. the
/// numerators evaluated at `mu`; both vanish in exact arithmetic.
pub fn lemma_hat_remainders(f: &RationalHN, mu: f64) -> Result<(f64, f64)> {
    let pair = f.poly_pair();
    let fmu = f.evaluate(mu)?;
    let up_num = pair
        .up
        .scale(-fmu)
        .add(&pair.down.mul(&Poly::linear(mu + fmu * fmu, -1.0)));
    let down_num = pair.up.add(&pair.down.scale(-fmu));
    Ok((up_num.divide_linear(mu).1, down_num.divide_linear(mu).1))
}

/// The polynomial pair of `theta_tilde(mu, tau, f)` built from the pair of `f`.
pub fn lemma_tilde_pair(f: &RationalHN, mu: f64, tau: f64) -> PolyPair {
    let pair = f.poly_pair();
    PolyPair {
        up: pair
            .up
            .scale(tau)
            .add(&pair.down.mul(&Poly::linear(-mu - tau * tau, 1.0))),
        down: pair.up.scale(-1.0).add(&pair.down.scale(tau)),
    }
}

/// Checks the inverse identities of the two endpoint maps.
///
/// With `tau = None` this tests `theta_tilde(mu, -f(mu), theta_hat(mu, f)) == f`;
/// with `Some(tau)` it tests `theta_hat(mu, theta_tilde(mu, tau, f)) == f`.
pub fn theta_roundtrip_check(mu: f64, tau: Option<f64>, f: &BoundaryObject, tol: f64) -> Result<bool> {
    let back = match tau {
        None => {
            let fmu = match f {
                BoundaryObject::Hn(g) => g.evaluate(mu)?,
                BoundaryObject::Inf(_) => f64::NAN,
            };
            f.theta_hat(mu)?.theta_tilde(mu, -fmu)?
        }
        Some(t) => f.theta_tilde(mu, t)?.theta_hat(mu)?,
    };
    Ok(back.approx_eq(f, tol))
}
