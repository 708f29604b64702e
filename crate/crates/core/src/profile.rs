//! Trial functions: radial profiles and radial times zonal-harmonic products.

use crate::error::{HardyError, Result};
use std::sync::Arc;

/// A radial function u(r) supported in [inner(), outer()], with derivative.
pub trait RadialProfile: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn deriv(&self, r: f64) -> f64;
    /// u vanishes for r >= outer().
    fn outer(&self) -> f64;
    /// u vanishes for r <= inner().
    fn inner(&self) -> f64 {
        0.0
    }
    /// Radii where u or u' may fail to be smooth; quadrature grades toward them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    fn name(&self) -> String;
}

pub type SharedProfile = Arc<dyn RadialProfile>;

impl<P: RadialProfile + ?Sized> RadialProfile for Arc<P> {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn deriv(&self, r: f64) -> f64 {
        (**self).deriv(r)
    }
    fn outer(&self) -> f64 {
        (**self).outer()
    }
    fn inner(&self) -> f64 {
        (**self).inner()
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// u(r) = (1 - (r/R)^m)^s on [0, R].
#[derive(Clone, Debug, PartialEq)]
pub struct PolyBump {
    pub big_r: f64,
    pub m: f64,
    pub s: f64,
}

impl PolyBump {
    pub fn new(big_r: f64, m: f64, s: f64) -> Result<Self> {
        if !(big_r > 0.0) || !(m >= 1.0) || !(s >= 1.0) {
            return Err(HardyError::Parameter(format!(
                "bump needs R > 0, m >= 1, s >= 1 (got {big_r}, {m}, {s})"
            )));
        }
        Ok(PolyBump { big_r, m, s })
    }
}

impl RadialProfile for PolyBump {
    fn value(&self, r: f64) -> f64 {
        if r >= self.big_r {
            return 0.0;
        }
        let x = r / self.big_r;
        (1.0 - x.powf(self.m)).powf(self.s)
    }
    fn deriv(&self, r: f64) -> f64 {
        if r >= self.big_r {
            return 0.0;
        }
        let x = r / self.big_r;
        let xm = x.powf(self.m);
        let base = if self.s == 1.0 { 1.0 } else { (1.0 - xm).powf(self.s - 1.0) };
        let dxm = if self.m == 1.0 { 1.0 } else { self.m * x.powf(self.m - 1.0) };
        -self.s * base * dxm / self.big_r
    }
    fn outer(&self) -> f64 {
        self.big_r
    }
    fn name(&self) -> String {
        format!("bump(m={},s={})", self.m, self.s)
    }
}

/// u(r) = (1 - r/R) * sum_j c_j (r/R)^j on [0, R].
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMix {
    pub big_r: f64,
    pub coeffs: Vec<f64>,
}

impl RadialProfile for PolyMix {
    fn value(&self, r: f64) -> f64 {
        if r >= self.big_r {
            return 0.0;
        }
        let x = r / self.big_r;
        (1.0 - x) * horner(&self.coeffs, x)
    }
    fn deriv(&self, r: f64) -> f64 {
        if r >= self.big_r {
            return 0.0;
        }
        let x = r / self.big_r;
        let (p, dp) = horner_d(&self.coeffs, x);
        (-p + (1.0 - x) * dp) / self.big_r
    }
    fn outer(&self) -> f64 {
        self.big_r
    }
    fn breakpoints(&self) -> Vec<f64> {
        // sign changes of u and u' produce kinks in |u|^q and |u'|^p
        let mut out = sign_changes(|r| self.value(r), self.big_r);
        out.extend(sign_changes(|r| self.deriv(r), self.big_r));
        out.sort_by(f64::total_cmp);
        out
    }
    fn name(&self) -> String {
        let c: Vec<String> = self.coeffs.iter().map(|c| format!("{c:.4}")).collect();
        format!("polymix({})", c.join(";"))
    }
}

/// Roots of a sign change of `f` on (0, R), located by scanning and bisection.
fn sign_changes<F: Fn(f64) -> f64>(f: F, big_r: f64) -> Vec<f64> {
    const SCAN: usize = 256;
    let mut out = Vec::new();
    let mut a = 0.0;
    let mut fa = f(a);
    for j in 1..SCAN {
        let b = big_r * j as f64 / SCAN as f64;
        let fb = f(b);
        if fa * fb < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid) * fa < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        if fb != 0.0 {
            a = b;
            fa = fb;
        }
    }
    out
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn horner_d(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// u(r) * r/(r + c): forces the profile to vanish at the origin.
#[derive(Clone, Debug)]
pub struct OriginVanishing<P> {
    pub base: P,
    pub c: f64,
}

impl<P: RadialProfile> OriginVanishing<P> {
    /// Uses c = R/10.
    pub fn new(base: P) -> Self {
        let c = base.outer() / 10.0;
        OriginVanishing { base, c }
    }
}

impl<P: RadialProfile> RadialProfile for OriginVanishing<P> {
    fn value(&self, r: f64) -> f64 {
        self.base.value(r) * r / (r + self.c)
    }
    fn deriv(&self, r: f64) -> f64 {
        let g = r / (r + self.c);
        let dg = self.c / ((r + self.c) * (r + self.c));
        self.base.deriv(r) * g + self.base.value(r) * dg
    }
    fn outer(&self) -> f64 {
        self.base.outer()
    }
    fn inner(&self) -> f64 {
        self.base.inner()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }
    fn name(&self) -> String {
        format!("{}*r/(r+{})", self.base.name(), self.c)
    }
}

/// c * u(r).
#[derive(Clone, Debug)]
pub struct Scaled<P> {
    pub base: P,
    pub c: f64,
}

impl<P: RadialProfile> RadialProfile for Scaled<P> {
    fn value(&self, r: f64) -> f64 {
        self.c * self.base.value(r)
    }
    fn deriv(&self, r: f64) -> f64 {
        self.c * self.base.deriv(r)
    }
    fn outer(&self) -> f64 {
        self.base.outer()
    }
    fn inner(&self) -> f64 {
        self.base.inner()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }
    fn name(&self) -> String {
        format!("{}*{}", self.c, self.base.name())
    }
}

/// Profile given by closures.
pub struct FnProfile<F, G> {
    pub f: F,
    pub df: G,
    pub big_r: f64,
    pub label: String,
}

impl<F, G> FnProfile<F, G>
where
    F: Fn(f64) -> f64 + Send + Sync,
    G: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(label: &str, big_r: f64, f: F, df: G) -> Self {
        FnProfile {
            f,
            df,
            big_r,
            label: label.to_string(),
        }
    }
}

impl<F, G> RadialProfile for FnProfile<F, G>
where
    F: Fn(f64) -> f64 + Send + Sync,
    G: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, r: f64) -> f64 {
        if r >= self.big_r {
            0.0
        } else {
            (self.f)(r)
        }
    }
    fn deriv(&self, r: f64) -> f64 {
        if r >= self.big_r {
            0.0
        } else {
            (self.df)(r)
        }
    }
    fn outer(&self) -> f64 {
        self.big_r
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}

/// Piecewise cubic Hermite interpolant of a sampled table. Without explicit
/// derivatives the slopes follow the Fritsch-Carlson monotone rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    r: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    label: String,
}

impl Sampled {
    pub fn new(r: Vec<f64>, u: Vec<f64>, du: Option<Vec<f64>>) -> Result<Self> {
        let n = r.len();
        if n < 2 || u.len() != n || du.as_ref().is_some_and(|d| d.len() != n) {
            return Err(HardyError::Parameter("sampled profile needs >= 2 rows of equal length".into()));
        }
        if r[0] < 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HardyError::Parameter("sampled radii must be >= 0 and strictly increasing".into()));
        }
        if r.iter().chain(&u).any(|v| !v.is_finite()) {
            return Err(HardyError::Parameter("sampled values must be finite".into()));
        }
        let du = match du {
            Some(d) => d,
            None => monotone_slopes(&r, &u),
        };
        Ok(Sampled {
            r,
            u,
            du,
            label: "sampled".into(),
        })
    }

    /// Reads `r,u[,du]` rows; a non-numeric first line is taken as a header.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut r = Vec::new();
        let mut u = Vec::new();
        let mut du = Vec::new();
        let mut cols = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            let vals = match parsed {
                Ok(v) => v,
                Err(_) if r.is_empty() && cols.is_none() => {
                    cols = Some(fields.len());
                    continue;
                }
                Err(e) => return Err(HardyError::Parameter(format!("line {}: {e}", i + 1))),
            };
            if vals.len() < 2 || vals.len() > 3 {
                return Err(HardyError::Parameter(format!("line {}: expected 2 or 3 columns", i + 1)));
            }
            if *cols.get_or_insert(vals.len()) != vals.len() {
                return Err(HardyError::Parameter(format!("line {}: inconsistent column count", i + 1)));
            }
            r.push(vals[0]);
            u.push(vals[1]);
            if vals.len() == 3 {
                du.push(vals[2]);
            }
        }
        let du = if du.is_empty() { None } else { Some(du) };
        Sampled::new(r, u, du)
    }

    fn locate(&self, r: f64) -> Option<usize> {
        if r < self.r[0] || r > *self.r.last().unwrap() {
            return None;
        }
        let i = self.r.partition_point(|&x| x <= r);
        Some(i.clamp(1, self.r.len() - 1) - 1)
    }
}

fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        m[i] = if delta[i - 1] * delta[i] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[i - 1] + delta[i])
        };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / delta[i];
        let b = m[i + 1] / delta[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let t = 3.0 / s.sqrt();
            m[i] = t * a * delta[i];
            m[i + 1] = t * b * delta[i];
        }
    }
    m
}

impl RadialProfile for Sampled {
    fn value(&self, r: f64) -> f64 {
        let Some(i) = self.locate(r) else { return 0.0 };
        let h = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        h00 * self.u[i] + h10 * h * self.du[i] + h01 * self.u[i + 1] + h11 * h * self.du[i + 1]
    }
    fn deriv(&self, r: f64) -> f64 {
        let Some(i) = self.locate(r) else { return 0.0 };
        let h = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / h;
        let d00 = 6.0 * t * t - 6.0 * t;
        let d10 = 3.0 * t * t - 4.0 * t + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * t * t - 2.0 * t;
        (d00 * self.u[i] + d01 * self.u[i + 1]) / h + d10 * self.du[i] + d11 * self.du[i + 1]
    }
    fn outer(&self) -> f64 {
        *self.r.last().unwrap()
    }
    fn inner(&self) -> f64 {
        self.r[0]
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.r.clone()
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}

/// Gegenbauer C_l^lambda(x) and its x-derivative.
pub fn gegenbauer(l: usize, lambda: f64, x: f64) -> (f64, f64) {
    let c = |deg: usize, lam: f64| -> f64 {
        if deg == 0 {
            return 1.0;
        }
        let mut c0 = 1.0;
        let mut c1 = 2.0 * lam * x;
        for m in 2..=deg {
            let mf = m as f64;
            let c2 = (2.0 * x * (mf + lam - 1.0) * c1 - (mf + 2.0 * lam - 2.0) * c0) / mf;
            c0 = c1;
            c1 = c2;
        }
        c1
    };
    let v = c(l, lambda);
    let d = if l == 0 { 0.0 } else { 2.0 * lambda * c(l - 1, lambda + 1.0) };
    (v, d)
}

/// Zonal spherical harmonic of degree l on S^(n-1), normalized so that the
/// sphere average of its square is 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZonalHarmonic {
    pub n: usize,
    pub l: usize,
    scale: f64,
}

impl ZonalHarmonic {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n < 2 {
            return Err(HardyError::Parameter(format!("dimension {n} < 2")));
        }
        let scale = if n == 2 {
            if l == 0 {
                1.0
            } else {
                2f64.sqrt()
            }
        } else {
            let lam = (n as f64 - 2.0) / 2.0;
            // mean of C_l^2 over the sphere = lam/(l+lam) * prod_{j<l} (2 lam + j)/(j + 1)
            let mut mean = lam / (l as f64 + lam);
            for j in 0..l {
                mean *= (2.0 * lam + j as f64) / (j as f64 + 1.0);
            }
            1.0 / mean.sqrt()
        };
        Ok(ZonalHarmonic { n, l, scale })
    }

    /// Laplace-Beltrami eigenvalue l(l + n - 2).
    pub fn eigenvalue(&self) -> f64 {
        (self.l * (self.l + self.n - 2)) as f64
    }

    /// h(theta) and dh/dtheta.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        if self.n == 2 {
            let lf = self.l as f64;
            return (self.scale * (lf * theta).cos(), -self.scale * lf * (lf * theta).sin());
        }
        let lam = (self.n as f64 - 2.0) / 2.0;
        let (v, d) = gegenbauer(self.l, lam, theta.cos());
        (self.scale * v, -self.scale * d * theta.sin())
    }
}

/// u(r, theta) = phi(r) h_l(theta).
#[derive(Clone)]
pub struct SeparableProfile {
    pub radial: SharedProfile,
    pub harmonic: ZonalHarmonic,
}

impl SeparableProfile {
    pub fn new(radial: SharedProfile, n: usize, l: usize) -> Result<Self> {
        Ok(SeparableProfile {
            radial,
            harmonic: ZonalHarmonic::new(n, l)?,
        })
    }

    pub fn l(&self) -> usize {
        self.harmonic.l
    }

    pub fn value(&self, r: f64, theta: f64) -> f64 {
        self.radial.value(r) * self.harmonic.eval(theta).0
    }

    /// |grad u|^2 = (phi' h)^2 + (phi/r)^2 (dh/dtheta)^2.
    pub fn grad_sq(&self, r: f64, theta: f64) -> f64 {
        let (h, dh) = self.harmonic.eval(theta);
        let a = self.radial.deriv(r) * h;
        let b = self.radial.value(r) / r * dh;
        a * a + b * b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_endpoints() {
        let b = PolyBump::new(1.0, 2.0, 2.0).unwrap();
        assert_eq!(b.value(0.0), 1.0);
        assert_eq!(b.value(1.0), 0.0);
        assert_eq!(b.deriv(0.0), 0.0);
    }

    #[test]
    fn legendre_from_gegenbauer() {
        let (v, d) = gegenbauer(2, 0.5, 0.3);
        assert!((v - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-15);
        assert!((d - 0.9).abs() < 1e-15);
    }

    #[test]
    fn sampled_reproduces_cubic_with_exact_slopes() {
        let r: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let u: Vec<f64> = r.iter().map(|x| 1.0 - x * x * x).collect();
        let du: Vec<f64> = r.iter().map(|x| -3.0 * x * x).collect();
        let s = Sampled::new(r, u, Some(du)).unwrap();
        for x in [0.05, 0.33, 0.71, 0.99] {
            assert!((s.value(x) - (1.0 - x * x * x)).abs() < 1e-14);
            assert!((s.deriv(x) + 3.0 * x * x).abs() < 1e-13);
        }
    }

    #[test]
    fn csv_with_header() {
        let s = Sampled::from_csv_str("r,u\n0,1\n0.5,0.5\n1,0\n").unwrap();
        assert!((s.value(0.25) - 0.75).abs() < 1e-14);
        assert!(Sampled::from_csv_str("r,u\n0,1\n0.5,x\n").is_err());
        assert!(Sampled::from_csv_str("0,1\n0,0\n").is_err());
    }
}
