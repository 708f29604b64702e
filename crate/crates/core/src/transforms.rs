//! Ground-state transform u = f v, the coefficient A = r f'/f, the
//! supersolution residual, the Emden-Fowler change of variables and the
//! elementary vector inequalities behind the lower bounds.

use crate::config::{HardyConfig, Regime};
use crate::error::{domain, HardyError, Result};
use crate::functionals::{check_admissible, profile_mesh, Estimate};
use crate::profile::RadialProfile;
use crate::quad::{integrate_radial_vec, GradedMesh};
use crate::weights::{eval_ln_f, Weights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The radial ground state f_{a,k,D}(r) = sgn(n-p) r^(1-n/p) Y_k^(-1/p)(r/D) (1 - a X_1(r/D)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundState {
    pub cfg: HardyConfig,
    pub a: f64,
}

impl GroundState {
    /// For p < 2 requires 1 - a X_1(r/D) >= 2 - p on (0, R].
    pub fn new(cfg: HardyConfig, a: f64) -> Result<Self> {
        cfg.validate()?;
        if !(a >= 0.0) || !a.is_finite() {
            return Err(HardyError::Parameter(format!("a = {a} must be >= 0")));
        }
        // X_1 increases in t, so the worst point is r = R
        let x1 = 1.0 / (1.0 - (cfg.big_r / cfg.d).ln());
        let rho = 1.0 - a * x1;
        let floor = if cfg.p < 2.0 { 2.0 - cfg.p } else { 0.0 };
        if rho < floor || rho <= 0.0 {
            return Err(HardyError::Precondition(format!(
                "1 - a X_1(R/D) = {rho} falls below {floor}; increase D"
            )));
        }
        Ok(GroundState { cfg, a })
    }

    /// a = 0 for p >= 2 and a = p for p < 2.
    pub fn default_for(cfg: HardyConfig) -> Result<Self> {
        let a = if cfg.p >= 2.0 { 0.0 } else { cfg.p };
        Self::new(cfg, a)
    }

    fn weights(&self, r: f64) -> Result<Weights> {
        if !(r > 0.0 && r <= self.cfg.d) {
            return Err(domain("r", r, "(0, D]"));
        }
        Weights::new(self.cfg.k.max(1), r / self.cfg.d)
    }

    pub fn eval_f(&self, r: f64) -> Result<f64> {
        let w = self.weights(r)?;
        let c = &self.cfg;
        let y = w.y(c.k);
        Ok(c.sign() * r.powf(1.0 - c.nf() / c.p) * y.powf(-1.0 / c.p) * (1.0 - self.a * w.x(1)))
    }

    /// A_{a,k}(t) = (p-n)/p - Z_k/p - a X_1^2/(1 - a X_1); f' = f A / r.
    pub fn eval_a(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(domain("t", t, "(0, 1]"));
        }
        let w = Weights::new(self.cfg.k.max(1), t)?;
        Ok(self.a_from(&w))
    }

    fn a_from(&self, w: &Weights) -> f64 {
        let c = &self.cfg;
        let x1 = w.x(1);
        c.a0() - w.z(c.k) / c.p - self.a * x1 * x1 / (1.0 - self.a * x1)
    }

    pub fn eval_df(&self, r: f64) -> Result<f64> {
        let w = self.weights(r)?;
        Ok(self.eval_f(r)? * self.a_from(&w) / r)
    }

    /// Normalized supersolution residual
    /// [-Delta_p f - V |f|^(p-2) f / r^p] / (|f|^(p-2) f / r^p), with
    /// V = |(p-n)/p|^p + ((p-1)/2p) |(p-n)/p|^(p-2) sum_{i<=k} Y_i^2.
    /// It vanishes identically for p = 2 and a = 0.
    pub fn residual(&self, r: f64) -> Result<f64> {
        let c = &self.cfg;
        if !(r > 0.0 && r < c.big_r) {
            return Err(domain("r", r, "(0, R)"));
        }
        if c.p >= 2.0 && self.a != 0.0 {
            return Err(HardyError::Parameter("the residual needs a = 0 when p >= 2".into()));
        }
        let w = self.weights(r)?;
        Ok(self.residual_at(&w))
    }

    /// The residual at a point given by its weights; `w` must have depth >= k.
    pub fn residual_at(&self, w: &Weights) -> f64 {
        let c = &self.cfg;
        let (p, k) = (c.p, c.k);
        let a0 = c.a0();
        let s = w.sum_y2(k);
        if self.a == 0.0 {
            let z = -w.z(k) / (p * a0);
            let sigma = (p - 1.0) * s / (2.0 * p * a0 * a0);
            let q = p - 2.0;
            if 1.0 + z > 0.0 {
                let pw = pow1pm1(z, q);
                return a0.abs().powf(p) * (h_series(z, q) + sigma * pw);
            }
        }
        let aa = self.a_from(w);
        let x1 = w.x(1);
        let zk = w.z(k);
        let rho = 1.0 - self.a * x1;
        let r_da = -(zk * zk + s) / (2.0 * p) - self.a * x1 * x1 * x1 * (2.0 - self.a * x1) / (rho * rho);
        let bracket = -((p - 1.0) * aa * aa + (p - 1.0) * r_da + (c.nf() - p) * aa);
        let v = a0.abs().powf(p) + c.c_rem() * s;
        aa.abs().powf(p - 2.0) * bracket - v
    }

    /// True when f is a supersolution (p < n) or subsolution (p > n) at r,
    /// i.e. sgn(n - p) residual >= 0.
    pub fn classical_sign_ok(&self, r: f64) -> Result<bool> {
        Ok(self.cfg.sign() * self.residual(r)? >= 0.0)
    }
}

/// (1+z)^q - 1 without cancellation.
fn pow1pm1(z: f64, q: f64) -> f64 {
    (q * z.ln_1p()).exp_m1()
}

/// h_q(z) = (1+z)^q (1 - q z + q(q+1) z^2/2) - 1 = sum_{j>=3} c_j z^j.
fn h_series(z: f64, q: f64) -> f64 {
    if q == 0.0 {
        return 0.0;
    }
    if z.abs() > 0.1 {
        let pz = (1.0 + z).powf(q);
        return pz * (1.0 - q * z + 0.5 * q * (q + 1.0) * z * z) - 1.0;
    }
    // binomial coefficients b_j of (1+z)^q
    let mut b = [0.0f64; 40];
    b[0] = 1.0;
    for j in 1..40 {
        b[j] = b[j - 1] * (q - (j as f64 - 1.0)) / j as f64;
    }
    let c2 = 0.5 * q * (q + 1.0);
    let mut sum = 0.0;
    let mut zp = z * z * z;
    for j in 3..40 {
        let cj = b[j] - q * b[j - 1] + c2 * b[j - 2];
        sum += cj * zp;
        zp *= z;
        if zp.abs() < 1e-30 {
            break;
        }
    }
    sum
}

/// v = u / f for a given ground state, as a radial profile.
#[derive(Clone)]
pub struct GroundSplit<P> {
    pub u: P,
    pub gs: GroundState,
}

impl<P: RadialProfile> GroundSplit<P> {
    pub fn new(u: P, gs: GroundState) -> Self {
        GroundSplit { u, gs }
    }
}

impl<P: RadialProfile> RadialProfile for GroundSplit<P> {
    fn value(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let f = self.gs.eval_f(r).expect("r in (0, D]");
        self.u.value(r) / f
    }
    fn deriv(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let f = self.gs.eval_f(r).expect("r in (0, D]");
        let a = self.gs.eval_a(r / self.gs.cfg.d).expect("r/D in (0, 1]");
        (self.u.deriv(r) - self.u.value(r) * a / r) / f
    }
    fn outer(&self) -> f64 {
        self.u.outer()
    }
    fn inner(&self) -> f64 {
        self.u.inner()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.u.breakpoints()
    }
    fn name(&self) -> String {
        format!("{}/f", self.u.name())
    }
}

/// v = u/f with a division-by-zero guard.
pub fn ground_state_split<P: RadialProfile>(u: P, gs: GroundState) -> Result<GroundSplit<P>> {
    let x1 = 1.0 / (1.0 - (u.outer().min(gs.cfg.big_r) / gs.cfg.d).ln());
    if 1.0 - gs.a * x1 <= 0.0 {
        return Err(HardyError::ZeroDenominator("ground state"));
    }
    Ok(GroundSplit::new(u, gs))
}

/// int |f|^p |v'|^p over the ball, v = u/f; for p = 2 this equals I_k[u].
pub fn ground_state_energy<P: RadialProfile>(u: &P, gs: &GroundState) -> Result<Estimate> {
    let cfg = &gs.cfg;
    check_admissible(u, cfg)?;
    let Some(mesh) = profile_mesh(u, cfg.big_r, cfg) else {
        return Ok(Estimate { value: 0.0, err_est: 0.0 });
    };
    let (n, p) = (cfg.nf(), cfg.p);
    let q = integrate_radial_vec(
        |r, out| {
            let a = gs.eval_a(r / cfg.d).expect("r/D in (0, 1]");
            // f v' = u' - u A / r
            let fdv = u.deriv(r) - u.value(r) * a / r;
            out[0] = fdv.abs().powf(p) * r.powf(n - 1.0);
        },
        1,
        &mesh,
    )?;
    Ok(Estimate {
        value: cfg.surface() * q[0].value,
        err_est: cfg.surface() * q[0].err_est,
    })
}

/// tau = 1/X_{k+1}(r/D) on the unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmdenFowlerMap {
    pub cfg: HardyConfig,
    pub tau0: f64,
}

impl EmdenFowlerMap {
    pub fn new(cfg: HardyConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.big_r != 1.0 {
            return Err(HardyError::Parameter("the Emden-Fowler map is normalized to R = 1".into()));
        }
        let tau0 = 1.0 / Weights::new(cfg.k, 1.0 / cfg.d)?.next_x();
        Ok(EmdenFowlerMap { cfg, tau0 })
    }

    pub fn forward(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(domain("r", r, "(0, 1]"));
        }
        Ok(1.0 / Weights::new(self.cfg.k, r / self.cfg.d)?.next_x())
    }

    /// ln r for a given tau; stays finite far below the smallest double.
    pub fn ln_inverse(&self, tau: f64) -> Result<f64> {
        if !(tau >= self.tau0 * (1.0 - 1e-15)) {
            return Err(domain("tau", tau, "[tau0, inf)"));
        }
        Ok(self.cfg.d.ln() + eval_ln_f(self.cfg.k + 1, (1.0 / tau).min(1.0))?)
    }

    pub fn inverse(&self, tau: f64) -> Result<f64> {
        Ok(self.ln_inverse(tau)?.exp().min(1.0))
    }

    /// dtau/dr = -Y_k(r/D)/r.
    pub fn dtau_dr(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(domain("r", r, "(0, 1]"));
        }
        Ok(-Weights::new(self.cfg.k, r / self.cfg.d)?.yk() / r)
    }
}

/// The weighted quotient in r and its Emden-Fowler image in tau.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuotientPair {
    pub q_r: f64,
    pub q_tau: f64,
    /// numerator and powered denominator of q_r
    pub num: f64,
    pub den: f64,
    pub err_est: f64,
}

/// Q_r = int r^(p-n) |v'|^p Y_{k+1}^(2-p) Y_k^-1 / (int r^-n |v|^p* Y_k X_{k+1}^(1+p*/p))^(p/p*)
/// and Q_tau = int tau^(p-2) |w'|^p / (int tau^(-1-p*/p) |w|^p*)^(p/p*), w(tau) = v(r).
pub fn quotient_pair<P: RadialProfile>(v: &P, cfg: &HardyConfig) -> Result<QuotientPair> {
    let ps = cfg.p_star().ok_or(HardyError::Regime("p < n"))?;
    let map = EmdenFowlerMap::new(*cfg)?;
    check_admissible(v, cfg)?;
    let (n, p, k) = (cfg.nf(), cfg.p, cfg.k);
    let e = ps / p;
    let sf = cfg.surface();
    let Some(mesh) = profile_mesh(v, 1.0, cfg) else {
        return Err(HardyError::ZeroDenominator("quotient"));
    };
    let qr = integrate_radial_vec(
        |r, out| {
            let w = Weights::new(k + 1, r / cfg.d).expect("r/D in (0,1]");
            let m = r.powf(n - 1.0);
            out[0] = r.powf(p - n) * v.deriv(r).abs().powf(p) * w.y(k + 1).powf(2.0 - p) / w.y(k) * m;
            out[1] = r.powf(-n) * v.value(r).abs().powf(ps) * w.y(k) * w.x(k + 1).powf(1.0 + e) * m;
        },
        2,
        &mesh,
    )?;
    // below r_min |v| is frozen and the weight integrates to X_{k+1}^(p*/p)/(p*/p)
    let (r_tail, tau_max) = if mesh.r_lo == 0.0 {
        let x = Weights::new(k, mesh.r_min / cfg.d)?.next_x();
        (v.value(mesh.r_min).abs().powf(ps) * x.powf(e) / e, 1.0 / x)
    } else {
        (0.0, map.forward(mesh.r_lo)?)
    };
    let num_r = sf * qr[0].value;
    let den_r = sf * (qr[1].value + r_tail);
    if !(den_r > 0.0) {
        return Err(HardyError::ZeroDenominator("quotient"));
    }
    let q_r = num_r / den_r.powf(p / ps);

    let tau_hi = map.forward(v.outer().min(1.0))?;
    let tau_breaks: Vec<f64> = v
        .breakpoints()
        .into_iter()
        .filter(|&b| b > 0.0 && b < 1.0)
        .filter_map(|b| map.forward(b).ok())
        .collect();
    let tmesh = GradedMesh::with_breakpoints(tau_hi, tau_max, &tau_breaks, &cfg.quad);
    let qt = integrate_radial_vec(
        |tau, out| {
            let ln_r = map.ln_inverse(tau).expect("tau >= tau0");
            let r = ln_r.exp();
            let yk = Weights::from_ln(k, ln_r - cfg.d.ln()).expect("r <= D").yk();
            // dw/dtau = v'(r) dr/dtau = -v'(r) r / Y_k
            let dw = -v.deriv(r) * r / yk;
            out[0] = tau.powf(p - 2.0) * dw.abs().powf(p);
            out[1] = tau.powf(-1.0 - e) * v.value(r).abs().powf(ps);
        },
        2,
        &tmesh,
    )?;
    let tau_tail = if mesh.r_lo == 0.0 {
        v.value(mesh.r_min).abs().powf(ps) * tau_max.powf(-e) / e
    } else {
        0.0
    };
    let num_t = sf * qt[0].value;
    let den_t = sf * (qt[1].value + tau_tail);
    let q_tau = num_t / den_t.powf(p / ps);
    let rel = |num: f64, ne: f64, den: f64, de: f64| ne / num.abs().max(f64::MIN_POSITIVE) + (p / ps) * de / den;
    let err_est = q_r * rel(num_r, sf * qr[0].err_est, den_r, sf * (qr[1].err_est - qr[1].tail))
        + q_tau * rel(num_t, sf * qt[0].err_est, den_t, sf * qt[1].err_est);
    Ok(QuotientPair {
        q_r,
        q_tau,
        num: num_r,
        den: den_r.powf(p / ps),
        err_est,
    })
}

/// |a+b|^p - |a|^p - c |b|^p - p |a|^(p-2) a.b
pub fn vec_margin_power(p: f64, a: &[f64], b: &[f64], c: f64) -> f64 {
    let (na, nb, nab, dot) = norms(a, b);
    nab.powf(p) - na.powf(p) - c * nb.powf(p) - p * na.powf(p - 2.0) * dot
}

/// |a+b|^p - |a|^p - c |a|^(p-2) |b|^2 - p |a|^(p-2) a.b
pub fn vec_margin_quadratic(p: f64, a: &[f64], b: &[f64], c: f64) -> f64 {
    let (na, nb, nab, dot) = norms(a, b);
    let ap = if na == 0.0 { 0.0 } else { na.powf(p - 2.0) };
    nab.powf(p) - na.powf(p) - c * ap * nb * nb - p * ap * dot
}

/// |a+b|^p - |a|^p - p |a|^(p-2) a.b - c |b|^2 / (|a| + |b|)^(2-p), for 1 < p < 2.
pub fn vec_margin_subquadratic(p: f64, a: &[f64], b: &[f64], c: f64) -> f64 {
    let (na, nb, nab, dot) = norms(a, b);
    let lin = if na == 0.0 { 0.0 } else { p * na.powf(p - 2.0) * dot };
    let quad = if na + nb == 0.0 { 0.0 } else { c * nb * nb / (na + nb).powf(2.0 - p) };
    nab.powf(p) - na.powf(p) - lin - quad
}

fn norms(a: &[f64], b: &[f64]) -> (f64, f64, f64, f64) {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nab = a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt();
    let dot = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    (na, nb, nab, dot)
}

/// Which vector inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VecForm {
    /// remainder c |b|^p
    Power,
    /// remainder c |a|^(p-2) |b|^2
    Quadratic,
}

/// Largest admissible constant at a = e_1, b = t (cos phi, sin phi).
fn planar_constant(form: VecForm, p: f64, t: f64, phi: f64) -> f64 {
    let (c, s) = (phi.cos(), phi.sin());
    let nab = ((1.0 + t * c).powi(2) + (t * s).powi(2)).sqrt();
    let rem = nab.powf(p) - 1.0 - p * t * c;
    match form {
        VecForm::Power => rem / t.powf(p),
        VecForm::Quadratic => rem / (t * t),
    }
}

/// Best constant of the vector inequality for ratios |b|/|a| in
/// [1e-4, 1e4]. By rotation and homogeneity the problem reduces to a = e_1
/// and b in a plane; a coarse grid is followed by a compass search. The
/// result is lowered by 1e-8 relative to absorb the search tolerance.
pub fn calibrate_constant(form: VecForm, p: f64) -> f64 {
    use std::f64::consts::PI;
    let (lo, hi) = (-4.0 * 10f64.ln(), 4.0 * 10f64.ln());
    let f = |lt: f64, phi: f64| planar_constant(form, p, lt.clamp(lo, hi).exp(), phi.clamp(0.0, PI));
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=400 {
        let lt = lo + (hi - lo) * i as f64 / 400.0;
        for j in 0..=90 {
            let phi = PI * j as f64 / 90.0;
            let v = f(lt, phi);
            if v < best.0 {
                best = (v, lt, phi);
            }
        }
    }
    let mut step = ((hi - lo) / 400.0, PI / 90.0);
    while step.0 > 1e-12 || step.1 > 1e-12 {
        let mut moved = false;
        for (dl, dp) in [(step.0, 0.0), (-step.0, 0.0), (0.0, step.1), (0.0, -step.1)] {
            let (lt, phi) = ((best.1 + dl).clamp(lo, hi), (best.2 + dp).clamp(0.0, PI));
            let v = f(lt, phi);
            if v < best.0 {
                best = (v, lt, phi);
                moved = true;
            }
        }
        if !moved {
            step = (step.0 * 0.5, step.1 * 0.5);
        }
    }
    best.0 * (1.0 - 1e-8)
}

/// Summary of a randomized vector-inequality check.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorReport {
    pub p: f64,
    pub trials: usize,
    /// Calibrated constants (power form, quadratic form) for p >= 2.
    pub calibrated: Option<(f64, f64)>,
    /// Smallest per-sample admissible constant for each form, p >= 2.
    pub sample_min: Option<(f64, f64)>,
    /// Constant 3p(p-1)/16 checked for 1 < p < 2.
    pub sub_constant: Option<f64>,
    /// Worst margin divided by (|a| + |b|)^p over all samples and forms.
    pub worst_relative_margin: f64,
    pub holds: bool,
}

/// Draws `trials` pairs in dimensions 1..=5 with |b|/|a| log-uniform in
/// [1e-3, 1e3] and checks the inequalities appropriate to p.
pub fn vector_inequality_margin(p: f64, trials: usize, seed: u64) -> Result<VectorReport> {
    if !(p > 1.0) || trials == 0 {
        return Err(HardyError::Parameter(format!("need p > 1 and trials >= 1 (got {p}, {trials})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let calibrated = (p >= 2.0).then(|| (calibrate_constant(VecForm::Power, p), calibrate_constant(VecForm::Quadratic, p)));
    let sub = (p < 2.0).then(|| 3.0 * p * (p - 1.0) / 16.0);
    let mut worst = f64::INFINITY;
    let mut smin = (f64::INFINITY, f64::INFINITY);
    for _ in 0..trials {
        let dim = rng.gen_range(1..=5);
        let mut a: Vec<f64> = (0..dim).map(|_| gauss(&mut rng)).collect();
        let mut b: Vec<f64> = (0..dim).map(|_| gauss(&mut rng)).collect();
        let la = 10f64.powf(rng.gen_range(-2.0..2.0));
        let ratio = 10f64.powf(rng.gen_range(-3.0..3.0));
        normalize(&mut a, la);
        normalize(&mut b, la * ratio);
        let scale = (la * (1.0 + ratio)).powf(p);
        if let Some((c1, c2)) = calibrated {
            let m1 = vec_margin_power(p, &a, &b, c1);
            let m2 = vec_margin_quadratic(p, &a, &b, c2);
            worst = worst.min(m1 / scale).min(m2 / scale);
            let (na, nb, _, _) = norms(&a, &b);
            let r0 = vec_margin_power(p, &a, &b, 0.0);
            smin.0 = smin.0.min(r0 / nb.powf(p));
            smin.1 = smin.1.min(r0 / (na.powf(p - 2.0) * nb * nb));
        }
        if let Some(c) = sub {
            worst = worst.min(vec_margin_subquadratic(p, &a, &b, c) / scale);
        }
    }
    Ok(VectorReport {
        p,
        trials,
        calibrated,
        sample_min: calibrated.map(|_| smin),
        sub_constant: sub,
        worst_relative_margin: worst,
        holds: worst >= -1e-12,
    })
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn normalize(v: &mut [f64], len: f64) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v[0] = len;
        return;
    }
    v.iter_mut().for_each(|x| *x *= len / n);
}

/// Regime check shared by probes.
pub fn require_subcritical(cfg: &HardyConfig) -> Result<()> {
    if cfg.regime() == Regime::Subcritical {
        Ok(())
    } else {
        Err(HardyError::Regime("p < n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_direct_form() {
        for q in [1.0, 1.5, 4.0] {
            for z in [0.05, -0.05, 0.099] {
                let pz = (1.0f64 + z).powf(q);
                let direct = pz * (1.0 - q * z + 0.5 * q * (q + 1.0) * z * z) - 1.0;
                let s = h_series(z, q);
                assert!((s - direct).abs() < 1e-13, "q={q} z={z}: {s} vs {direct}");
            }
        }
    }

    #[test]
    fn p2_residual_is_zero() {
        let cfg = HardyConfig::new(3, 2.0, 3, 1.0, 10.0).unwrap();
        let gs = GroundState::new(cfg, 0.0).unwrap();
        assert_eq!(gs.residual(0.3).unwrap(), 0.0);
    }

    #[test]
    fn planar_constants() {
        assert!((calibrate_constant(VecForm::Power, 2.0) - 1.0).abs() < 1e-7);
        assert!((calibrate_constant(VecForm::Power, 3.0) - (2.0 - 2f64.sqrt())).abs() < 1e-7);
        assert!((calibrate_constant(VecForm::Power, 4.0) - 1.0 / 3.0).abs() < 1e-7);
    }
}
