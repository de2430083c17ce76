//! The square-integrable part `q` of the potential.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    Zero,
    Constant { c: f64 },
    /// `amplitude * cos(k x)`
    Cosine { amplitude: f64, k: f64 },
    /// `sum coefficients[i] * x^i`
    Polynomial { coefficients: Vec<f64> },
}

impl Preset {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Preset::Zero => 0.0,
            Preset::Constant { c } => *c,
            Preset::Cosine { amplitude, k } => amplitude * (k * x).cos(),
            Preset::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
        }
    }

    pub fn integral(&self) -> f64 {
        match self {
            Preset::Zero => 0.0,
            Preset::Constant { c } => c * PI,
            Preset::Cosine { amplitude, k } => {
                if *k == 0.0 {
                    amplitude * PI
                } else {
                    amplitude * (k * PI).sin() / k
                }
            }
            Preset::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| c * PI.powi(i as i32 + 1) / (i as f64 + 1.0))
                .sum(),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Preset::Zero => "zero",
            Preset::Constant { .. } => "constant",
            Preset::Cosine { .. } => "cosine",
            Preset::Polynomial { .. } => "polynomial",
        }
    }

    fn params(&self) -> Value {
        match self {
            Preset::Zero => json!({}),
            Preset::Constant { c } => json!({ "c": c }),
            Preset::Cosine { amplitude, k } => json!({ "amplitude": amplitude, "k": k }),
            Preset::Polynomial { coefficients } => json!({ "coefficients": coefficients }),
        }
    }

    fn from_parts(name: &str, params: &Value) -> Result<Preset> {
        let num = |key: &str| -> Result<f64> {
            params
                .get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::InvalidInput(format!("preset '{name}' needs numeric '{key}'")))
        };
        let p = match name {
            "zero" => Preset::Zero,
            "constant" => Preset::Constant { c: num("c")? },
            "cosine" => Preset::Cosine {
                amplitude: num("amplitude")?,
                k: num("k")?,
            },
            "polynomial" => {
                let coefficients = params
                    .get("coefficients")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::InvalidInput("polynomial preset needs 'coefficients'".into()))?
                    .iter()
                    .map(|v| {
                        v.as_f64()
                            .ok_or_else(|| Error::InvalidInput("non-numeric coefficient".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Preset::Polynomial { coefficients }
            }
            other => return Err(Error::InvalidInput(format!("unknown preset '{other}'"))),
        };
        Ok(p)
    }
}

/// Cubic spline through samples on `[0, pi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPotential {
    grid: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl SampledPotential {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 9 {
            return Err(Error::InvalidInput(format!(
                "sampled potential needs at least 9 points, got {}",
                grid.len()
            )));
        }
        if grid.len() != values.len() {
            return Err(Error::InvalidInput("grid and values differ in length".into()));
        }
        if values.iter().chain(&grid).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("grid must be strictly increasing".into()));
        }
        let tol = 1e-12;
        if grid[0].abs() > tol || (grid[grid.len() - 1] - PI).abs() > tol {
            return Err(Error::InvalidInput("grid must span [0, pi] including both ends".into()));
        }
        let second = spline_second_derivatives(&grid, &values);
        Ok(SampledPotential {
            grid,
            values,
            second,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(f: F, points: usize) -> Result<Self> {
        let n = points.max(2) - 1;
        let grid: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
        let values = grid.iter().map(|&x| f(x)).collect();
        SampledPotential::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.grid.len();
        let i = match self.grid.partition_point(|&g| g <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }

    pub fn integral(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.grid.len() - 1 {
            let h = self.grid[i + 1] - self.grid[i];
            s += h * (self.values[i] + self.values[i + 1]) / 2.0
                - h * h * h * (self.second[i] + self.second[i + 1]) / 24.0;
        }
        s
    }
}

/// Derivative at `at` of the interpolating polynomial through `(xs, ys)`.
fn lagrange_slope(xs: &[f64], ys: &[f64], at: f64) -> f64 {
    let n = xs.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut denom = 1.0;
        for j in 0..n {
            if j != i {
                denom *= xs[i] - xs[j];
            }
        }
        // derivative of prod_{j != i} (x - x_j) at `at`
        let mut deriv = 0.0;
        for k in 0..n {
            if k == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..n {
                if j != i && j != k {
                    prod *= at - xs[j];
                }
            }
            deriv += prod;
        }
        total += ys[i] * deriv / denom;
    }
    total
}

/// Second derivatives of the clamped cubic spline whose end slopes come from
/// five-point interpolation, which keeps the fourth-order accuracy up to the ends.
fn spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len() - 1;
    let h: Vec<f64> = (0..n).map(|i| x[i + 1] - x[i]).collect();
    let d: Vec<f64> = (0..n).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let s0 = lagrange_slope(&x[..5], &y[..5], x[0]);
    let sn = lagrange_slope(&x[n - 4..], &y[n - 4..], x[n]);
    let mut sub = vec![0.0; n + 1];
    let mut diag = vec![0.0; n + 1];
    let mut sup = vec![0.0; n + 1];
    let mut rhs = vec![0.0; n + 1];
    diag[0] = 2.0 * h[0];
    sup[0] = h[0];
    rhs[0] = 6.0 * (d[0] - s0);
    for i in 1..n {
        sub[i] = h[i - 1];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        sup[i] = h[i];
        rhs[i] = 6.0 * (d[i] - d[i - 1]);
    }
    sub[n] = h[n - 1];
    diag[n] = 2.0 * h[n - 1];
    rhs[n] = 6.0 * (sn - d[n - 1]);
    for i in 1..=n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n + 1];
    m[n] = rhs[n] / diag[n];
    for i in (0..n).rev() {
        m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
    }
    m
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRepr", into = "PotentialRepr")]
pub enum Potential {
    Preset(Preset),
    Sampled(SampledPotential),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum PotentialRepr {
    Preset {
        name: String,
        #[serde(default)]
        params: Value,
    },
    Sampled {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
}

impl TryFrom<PotentialRepr> for Potential {
    type Error = Error;
    fn try_from(r: PotentialRepr) -> Result<Self> {
        match r {
            PotentialRepr::Preset { name, params } => {
                Ok(Potential::Preset(Preset::from_parts(&name, &params)?))
            }
            PotentialRepr::Sampled { grid, values } => {
                Ok(Potential::Sampled(SampledPotential::new(grid, values)?))
            }
        }
    }
}

impl From<Potential> for PotentialRepr {
    fn from(p: Potential) -> Self {
        match p {
            Potential::Preset(pre) => PotentialRepr::Preset {
                name: pre.name().to_string(),
                params: pre.params(),
            },
            Potential::Sampled(s) => PotentialRepr::Sampled {
                grid: s.grid,
                values: s.values,
            },
        }
    }
}

impl Potential {
    pub fn zero() -> Self {
        Potential::Preset(Preset::Zero)
    }

    pub fn constant(c: f64) -> Self {
        Potential::Preset(Preset::Constant { c })
    }

    pub fn cosine(amplitude: f64, k: f64) -> Self {
        Potential::Preset(Preset::Cosine { amplitude, k })
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Potential::Preset(Preset::Polynomial { coefficients })
    }

    /// `q(x)` on the open interval.
    pub fn eval_q(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < PI) {
            return Err(Error::OutOfDomain { x });
        }
        Ok(self.value(x))
    }

    /// `q(x)` on the closed interval, without domain checks.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::Preset(p) => p.value(x),
            Potential::Sampled(s) => s.value(x),
        }
    }

    pub fn integral(&self) -> f64 {
        match self {
            Potential::Preset(p) => p.integral(),
            Potential::Sampled(s) => s.integral(),
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, Potential::Preset(_))
    }

    /// True iff `sup |q(x) - q(pi - x)| <= tol` on 257 uniform points.
    pub fn symmetrize_check(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    pub fn asymmetry(&self) -> f64 {
        (0..257)
            .map(|i| {
                let x = PI * i as f64 / 256.0;
                (self.value(x) - self.value(PI - x)).abs()
            })
            .fold(0.0, f64::max)
    }
}
