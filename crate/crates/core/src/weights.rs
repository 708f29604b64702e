//! Iterated-logarithm weights X_k, Y_k, Z_k on (0, 1], their derivatives,
//! the inverses F_i and the weighted power-integral bound.
//!
//! X_1(t) = 1/(1 - ln t), X_k = X_1(X_{k-1}), Y_k = X_1 X_2 ... X_k,
//! Z_k = Y_1 + ... + Y_k, with Y_0 = 1 and Z_0 = 0.

use crate::error::{domain, HardyError, Result};
use crate::quad::{integrate_radial, GradedMesh, QuadSettings};

/// Largest supported series depth.
pub const MAX_DEPTH: usize = 64;

const SLOTS: usize = MAX_DEPTH + 2;

/// All weights up to depth `k`, plus `X_{k+1}`, at one point.
#[derive(Clone, Debug)]
pub struct Weights {
    k: usize,
    x: [f64; SLOTS],
    y: [f64; SLOTS],
    z: [f64; SLOTS],
    s2: [f64; SLOTS],
    underflow: bool,
}

impl Weights {
    /// Weights at `t` in (0, 1].
    pub fn new(k: usize, t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(domain("t", t, "(0, 1]"));
        }
        Self::from_ln(k, t.ln())
    }

    /// Weights at the point with logarithm `ln_t <= 0`. Lets callers reach
    /// radii far below the smallest positive double.
    pub fn from_ln(k: usize, ln_t: f64) -> Result<Self> {
        if k > MAX_DEPTH {
            return Err(HardyError::Depth(k));
        }
        if ln_t.is_nan() || ln_t > 0.0 {
            return Err(domain("ln t", ln_t, "(-inf, 0]"));
        }
        let mut w = Weights {
            k,
            x: [0.0; SLOTS],
            y: [0.0; SLOTS],
            z: [0.0; SLOTS],
            s2: [0.0; SLOTS],
            underflow: false,
        };
        w.y[0] = 1.0;
        let mut xi = 1.0 / (1.0 - ln_t);
        for i in 1..=k + 1 {
            w.x[i] = xi;
            w.y[i] = w.y[i - 1] * xi;
            w.z[i] = w.z[i - 1] + w.y[i];
            w.s2[i] = w.s2[i - 1] + w.y[i] * w.y[i];
            xi = if xi > 0.0 { 1.0 / (1.0 - xi.ln()) } else { 0.0 };
        }
        w.underflow = k > 0 && w.y[k] == 0.0;
        Ok(w)
    }

    /// Weights at the point where X_{k+1} = 1/tau, tau >= 1. The lower levels
    /// are rebuilt downward with X_i = F_1(X_{i+1}) and may underflow to 0,
    /// so points far below the smallest double remain usable.
    pub fn from_top(k: usize, tau: f64) -> Result<Self> {
        if k > MAX_DEPTH {
            return Err(HardyError::Depth(k));
        }
        if !(tau >= 1.0) || !tau.is_finite() {
            return Err(domain("tau", tau, "[1, inf)"));
        }
        let mut w = Weights {
            k,
            x: [0.0; SLOTS],
            y: [0.0; SLOTS],
            z: [0.0; SLOTS],
            s2: [0.0; SLOTS],
            underflow: false,
        };
        w.x[k + 1] = 1.0 / tau;
        for i in (1..=k).rev() {
            let up = w.x[i + 1];
            w.x[i] = if up > 0.0 { (1.0 - 1.0 / up).exp() } else { 0.0 };
        }
        w.y[0] = 1.0;
        for i in 1..=k + 1 {
            w.y[i] = w.y[i - 1] * w.x[i];
            w.z[i] = w.z[i - 1] + w.y[i];
            w.s2[i] = w.s2[i - 1] + w.y[i] * w.y[i];
        }
        w.underflow = k > 0 && w.y[k] == 0.0;
        Ok(w)
    }

    pub fn depth(&self) -> usize {
        self.k
    }

    /// X_i for 1 <= i <= k + 1.
    pub fn x(&self, i: usize) -> f64 {
        debug_assert!(i >= 1 && i <= self.k + 1);
        self.x[i]
    }

    /// Y_i for 0 <= i <= k + 1.
    pub fn y(&self, i: usize) -> f64 {
        self.y[i]
    }

    /// Z_i for 0 <= i <= k + 1.
    pub fn z(&self, i: usize) -> f64 {
        self.z[i]
    }

    /// Y_1^2 + ... + Y_i^2.
    pub fn sum_y2(&self, i: usize) -> f64 {
        self.s2[i]
    }

    pub fn yk(&self) -> f64 {
        self.y[self.k]
    }

    pub fn zk(&self) -> f64 {
        self.z[self.k]
    }

    /// X_{k+1}.
    pub fn next_x(&self) -> f64 {
        self.x[self.k + 1]
    }

    /// True when Y_k underflowed to zero.
    pub fn underflow(&self) -> bool {
        self.underflow
    }
}

fn check_depth(k: usize) -> Result<()> {
    if k == 0 || k > MAX_DEPTH {
        Err(HardyError::Depth(k))
    } else {
        Ok(())
    }
}

pub fn eval_x(k: usize, t: f64) -> Result<f64> {
    check_depth(k)?;
    Ok(Weights::new(k, t)?.x(k))
}

pub fn eval_y(k: usize, t: f64) -> Result<f64> {
    check_depth(k)?;
    Ok(Weights::new(k, t)?.yk())
}

pub fn eval_z(k: usize, t: f64) -> Result<f64> {
    check_depth(k)?;
    Ok(Weights::new(k, t)?.zk())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightDerivatives {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

pub fn eval_derivatives(k: usize, t: f64) -> Result<WeightDerivatives> {
    check_depth(k)?;
    let w = Weights::new(k, t)?;
    Ok(WeightDerivatives {
        dx: w.yk() * w.x(k) / t,
        dy: w.yk() * w.zk() / t,
        dz: (w.zk() * w.zk() + w.sum_y2(k)) / (2.0 * t),
    })
}

/// Result of summing the full series Z_inf(t) = sum Y_k(t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZInf {
    pub value: f64,
    /// Number of terms summed explicitly.
    pub terms: usize,
    /// Closed-form estimate of the remaining tail, included in `value`.
    pub tail: f64,
}

// With L_i = -ln X_i the recursion reads L_{i+1} = ln(1 + L_i), so the
// tail after Y_K is Y_K * T(L_K) with T(L) = (1 + T(ln(1 + L)))/(1 + L).
// For small L, T(L) = 2/L - 1/6 + L/18 + c2 L^2 + O(L^3).
const TAIL_C2: f64 = -0.017_129_629_629_629_63;

fn tail_factor(l: f64) -> f64 {
    2.0 / l - 1.0 / 6.0 + l / 18.0 + TAIL_C2 * l * l
}

/// Sum of the full series. Terms are summed explicitly until the asymptotic
/// tail is accurate to `tol`; the tail is then added in closed form.
pub fn eval_z_inf(t: f64, tol: f64) -> Result<ZInf> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(domain("t", t, "(0, 1)"));
    }
    if t == 1.0 {
        return Err(HardyError::Divergence(t));
    }
    if !(tol > 0.0) {
        return Err(HardyError::Parameter(format!("tol must be positive, got {tol}")));
    }
    let mut l = (-t.ln()).ln_1p();
    let mut y = 1.0 / (1.0 - t.ln());
    let mut sum = y;
    let mut comp = 0.0;
    let mut terms = 1usize;
    const MAX_TERMS: usize = 50_000_000;
    loop {
        // truncation error of the tail expansion is of order L^3 * Y_K
        if (l < 0.05 && l * l * l * y < tol) || y == 0.0 {
            break;
        }
        if terms >= MAX_TERMS {
            break;
        }
        y /= 1.0 + l;
        l = l.ln_1p();
        let v = y - comp;
        let s = sum + v;
        comp = (s - sum) - v;
        sum = s;
        terms += 1;
    }
    let tail = if y == 0.0 { 0.0 } else { y * tail_factor(l) };
    Ok(ZInf {
        value: sum + tail,
        terms,
        tail,
    })
}

/// Natural log of the inverse F_i(s), i >= 1, s in (0, 1].
pub fn eval_ln_f(i: usize, s: f64) -> Result<f64> {
    check_depth(i)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(domain("s", s, "(0, 1]"));
    }
    let mut ln_f = 1.0 - 1.0 / s;
    for _ in 1..i {
        ln_f = 1.0 - (-ln_f).exp();
    }
    if ln_f.is_finite() {
        Ok(ln_f)
    } else {
        Err(domain("ln F_i(s)", ln_f, "finite (F_i(s) too small to represent)"))
    }
}

/// F_1(s) = exp(1 - 1/s), F_{i+1} = F_1(F_i). Inverse of X_i on (0, 1].
pub fn eval_f(i: usize, s: f64) -> Result<f64> {
    let v = eval_ln_f(i, s)?.exp();
    if v == 0.0 {
        return Err(domain("F_i(s)", 0.0, "positive (underflow)"));
    }
    Ok(v)
}

/// F_j(s) with F_0(s) = s; returns 0 on underflow instead of failing.
pub fn f_or_zero(j: usize, s: f64) -> f64 {
    let mut v = s;
    for _ in 0..j {
        if v <= 0.0 {
            return 0.0;
        }
        v = (1.0 - 1.0 / v).exp();
    }
    v
}

/// One row of the weighted power-integral bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub err_est: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub holds: bool,
}

/// Checks int_0^r s^(alpha-1) Y_k^(-beta)(s/D) ds <= c r^alpha Y_k^(-beta)(r/D)
/// on every radius of `grid`.
#[allow(clippy::too_many_arguments)]
pub fn verify_integral_bound(
    alpha: f64,
    beta: f64,
    c: f64,
    k: usize,
    big_r: f64,
    d: f64,
    grid: &[f64],
    quad: &QuadSettings,
) -> Result<BoundReport> {
    if !(alpha > 0.0) || !(beta > 0.0) {
        return Err(HardyError::Parameter("alpha and beta must be positive".into()));
    }
    if !(d >= big_r) || !(big_r > 0.0) {
        return Err(HardyError::Parameter(format!("need D >= R > 0, got R={big_r} D={d}")));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &r in grid {
        if !(r > 0.0 && r <= big_r) {
            return Err(domain("r", r, "(0, R]"));
        }
        let mesh = GradedMesh::new(r, quad);
        let q = integrate_radial(
            |s| {
                let w = Weights::new(k, s / d).expect("s/D in (0,1]");
                s.powf(alpha - 1.0) * w.yk().powf(-beta)
            },
            &mesh,
        )?;
        let yr = Weights::new(k, r / d)?.yk();
        let rhs = c * r.powf(alpha) * yr.powf(-beta);
        rows.push(BoundRow {
            r,
            lhs: q.value,
            rhs,
            margin: rhs - q.value,
            err_est: q.err_est,
        });
    }
    let holds = rows.iter().all(|row| row.margin >= -row.err_est);
    Ok(BoundReport { rows, holds })
}

/// Smallest ratio eta = D/R from `etas` (ascending) for which the bound holds
/// on a 40-point log grid of (0, R].
pub fn min_eta(
    alpha: f64,
    beta: f64,
    c: f64,
    k: usize,
    etas: &[f64],
    quad: &QuadSettings,
) -> Result<Option<f64>> {
    let grid: Vec<f64> = (0..40).map(|j| 10f64.powf(-8.0 * j as f64 / 39.0)).collect();
    for &eta in etas {
        let rep = verify_integral_bound(alpha, beta, c, k, 1.0, eta, &grid, quad)?;
        if rep.holds {
            return Ok(Some(eta));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stack_matches_scalar_evaluators() {
        let w = Weights::new(4, 0.3).unwrap();
        for i in 1..=4 {
            assert_eq!(w.x(i), eval_x(i, 0.3).unwrap());
            assert_eq!(w.y(i), eval_y(i, 0.3).unwrap());
            assert_eq!(w.z(i), eval_z(i, 0.3).unwrap());
        }
        assert_eq!(w.y(0), 1.0);
        assert_eq!(w.z(0), 0.0);
    }

    #[test]
    fn depth_zero_rejected_by_scalar_api() {
        assert!(matches!(eval_x(0, 0.5), Err(HardyError::Depth(0))));
        assert!(matches!(eval_y(65, 0.5), Err(HardyError::Depth(65))));
    }

    #[test]
    fn tail_factor_consistent_with_recursion() {
        let l = 1e-3;
        let lhs = (1.0 + l) * tail_factor(l);
        let rhs = 1.0 + tail_factor(l.ln_1p());
        assert!((lhs - rhs).abs() < 1e-9 * lhs);
    }
}
