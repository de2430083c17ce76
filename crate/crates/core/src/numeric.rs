//! Small numerical kernels shared across modules.

use crate::error::{Error, Result};
use std::f64::consts::LN_2;

/// A real number stored as `mantissa * exp(log)`.
///
/// Regular solutions grow or decay over many orders of magnitude for large
/// `|lambda|` or high singularity order, so every quantity built from them
/// carries its own exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub log: f64,
}

impl Scaled {
    pub fn new(mantissa: f64, log: f64) -> Self {
        Scaled { mantissa, log }.normalized()
    }

    pub fn from_f64(v: f64) -> Self {
        Scaled::new(v, 0.0)
    }

    /// The plain value; overflows to infinity when not representable.
    pub fn value(&self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa * self.log.exp()
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.log
    }

    pub fn mul(&self, other: &Scaled) -> Scaled {
        Scaled::new(self.mantissa * other.mantissa, self.log + other.log)
    }

    pub fn div(&self, other: &Scaled) -> Scaled {
        Scaled::new(self.mantissa / other.mantissa, self.log - other.log)
    }

    pub fn scale(&self, k: f64) -> Scaled {
        Scaled::new(self.mantissa * k, self.log)
    }

    pub fn add(&self, other: &Scaled) -> Scaled {
        if self.mantissa == 0.0 {
            return *other;
        }
        if other.mantissa == 0.0 {
            return *self;
        }
        let log = self.log.max(other.log);
        let m = self.mantissa * (self.log - log).exp() + other.mantissa * (other.log - log).exp();
        Scaled::new(m, log)
    }

    /// Value relative to `exp(reference)`, i.e. `mantissa * exp(log - reference)`.
    pub fn relative_to(&self, reference: f64) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa * (self.log - reference).exp()
    }

    fn normalized(self) -> Self {
        if self.mantissa == 0.0 || !self.mantissa.is_finite() {
            return self;
        }
        let (m, k) = split_pow2(self.mantissa);
        Scaled {
            mantissa: m,
            log: self.log + k as f64 * LN_2,
        }
    }
}

/// Splits `v` into `m * 2^k` with `|m|` in `[0.5, 1)`; exact in binary arithmetic.
pub fn split_pow2(v: f64) -> (f64, i32) {
    if v == 0.0 || !v.is_finite() {
        return (v, 0);
    }
    let k = v.abs().log2().floor() as i32 + 1;
    let m = scale_pow2(v, -k);
    // log2 rounding can be off by one near exact powers of two
    if m.abs() >= 1.0 {
        (m * 0.5, k + 1)
    } else if m.abs() < 0.5 {
        (m * 2.0, k - 1)
    } else {
        (m, k)
    }
}

/// `v * 2^k` without intermediate overflow or underflow.
pub fn scale_pow2(mut v: f64, mut k: i32) -> f64 {
    while k > 1000 {
        v *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        v *= 2f64.powi(-1000);
        k += 1000;
    }
    v * 2f64.powi(k)
}

/// Exact power of two for moderate exponents.
pub fn pow2(k: i32) -> f64 {
    if (-1000..=1000).contains(&k) {
        2f64.powi(k)
    } else {
        (k as f64 * LN_2).exp()
    }
}

/// Brent's method on a bracket `[a, b]` with `f(a) * f(b) <= 0`.
///
/// `fa` and `fb` are the already known end values. Stops once the bracket is
/// narrower than `2 * (4 eps |x| + xtol)`.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NumericalFailure(format!(
            "root not bracketed on [{a}, {b}]"
        )));
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NumericalFailure(format!(
        "Brent iteration did not converge near {b}"
    )))
}

/// Composite Simpson rule on uniformly spaced samples (odd count).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd number of samples");
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// `sum_{j >= 0} 1 / (x + j)^2` for `x > 0` (the trigamma function).
pub fn inverse_square_tail(mut x: f64) -> f64 {
    assert!(x > 0.0);
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = x * x;
    // Euler-Maclaurin tail
    acc + 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x)
        + 1.0 / (42.0 * x2 * x2 * x2 * x)
        - 1.0 / (30.0 * x2 * x2 * x2 * x2 * x)
}

/// Dense least squares `min |A c - y|` via normal equations; `rows` are the
/// design-matrix rows. Intended for a handful of unknowns.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let k = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.len() < k || k == 0 {
        return Err(Error::InsufficientData {
            needed: k.max(1),
            got: rows.len(),
        });
    }
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += row[i] * row[j];
            }
            a[i][k] += row[i] * yi;
        }
    }
    solve_augmented(a)
}

/// Gaussian elimination with partial pivoting on an augmented `k x (k+1)` system.
fn solve_augmented(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let k = a.len();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[piv][col] == 0.0 {
            return Err(Error::NumericalFailure("singular least-squares system".into()));
        }
        a.swap(col, piv);
        for r in (col + 1)..k {
            let factor = a[r][col] / a[col][col];
            for c in col..=k {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let mut s = a[r][k];
        for c in (r + 1)..k {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Ok(x)
}

/// Least-squares polynomial of the given degree through `(xs, ys)`, centred at
/// `origin` for conditioning. Returns ascending coefficients in `(x - origin)`.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize, origin: f64) -> Result<Vec<f64>> {
    let scale = xs
        .iter()
        .map(|x| (x - origin).abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            let t = (x - origin) / scale;
            (0..=degree).map(|p| t.powi(p as i32)).collect()
        })
        .collect();
    let c = least_squares(&rows, ys)?;
    Ok(c
        .iter()
        .enumerate()
        .map(|(p, v)| v / scale.powi(p as i32))
        .collect())
}

pub fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_arithmetic_survives_overflow() {
        let big = Scaled::new(1.5, 800.0);
        let small = Scaled::new(2.0, -800.0);
        let p = big.mul(&small);
        assert!((p.value() - 3.0).abs() < 1e-12);
        assert!(big.value().is_infinite());
        let s = Scaled::new(1.0, 3.0).add(&Scaled::new(-1.0, 3.0));
        assert_eq!(s.value(), 0.0);
    }

    #[test]
    fn split_pow2_is_exact() {
        for &v in &[1.0, 0.5, 3.75, -1e300, 7e-310, 1024.0] {
            let (m, k) = split_pow2(v);
            assert!(m.abs() >= 0.5 && m.abs() < 1.0, "{v} -> {m}");
            assert_eq!(scale_pow2(m, k), v);
        }
    }

    #[test]
    fn brent_finds_cubic_root() {
        let f = |x: f64| Ok(x * x * x - 2.0 * x - 5.0);
        let r = brent(f, 2.0, 3.0, -1.0, 16.0, 1e-14, 100).unwrap();
        assert!((r - 2.094_551_481_542_326_5).abs() < 1e-13);
    }

    #[test]
    fn simpson_integrates_cubic_exactly() {
        let n = 11;
        let h = 1.0 / (n - 1) as f64;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&v, h) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn inverse_square_tail_matches_zeta() {
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((inverse_square_tail(1.0) - z2).abs() < 1e-13);
        assert!((inverse_square_tail(2.0) - (z2 - 1.0)).abs() < 1e-13);
        // psi'(1/2) = pi^2 / 2
        assert!((inverse_square_tail(0.5) - 3.0 * z2).abs() < 1e-12);
    }

    #[test]
    fn polyfit_recovers_quadratic() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64 * 0.1 + 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - x + 0.5 * x * x).collect();
        let c = polyfit(&xs, &ys, 2, 1.0).unwrap();
        for &x in &[0.0, 1.0, 2.5] {
            let expect = 2.0 - x + 0.5 * x * x;
            assert!((horner(&c, x - 1.0) - expect).abs() < 1e-10);
        }
    }
}
