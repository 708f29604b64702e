//! The improved Hardy functional I_k[u; D] and the right-hand sides and
//! margins it is compared against.

use crate::config::{HardyConfig, Regime};
use crate::error::{HardyError, Result};
use crate::profile::{RadialProfile, SeparableProfile};
use crate::quad::{integrate_radial_vec, integrate_zonal, sup_over_pairs, sup_radial, GradedMesh, PAIR_ROUNDS};
use crate::weights::Weights;

/// Itemized value of I_k[u; D]. All integrals include the surface factor.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalReport {
    pub dirichlet: f64,
    pub hardy: f64,
    /// remainder[i - 1] = int |u|^p/|x|^p Y_i^2(|x|/D), i = 1..=k.
    pub remainder: Vec<f64>,
    pub ik: f64,
    pub err_est: f64,
    pub c_hardy: f64,
    pub c_rem: f64,
}

impl FunctionalReport {
    fn assemble(dirichlet: f64, hardy: f64, remainder: Vec<f64>, err_est: f64, cfg: &HardyConfig) -> Self {
        let mut r = FunctionalReport {
            dirichlet,
            hardy,
            remainder,
            ik: 0.0,
            err_est,
            c_hardy: cfg.c_hardy(),
            c_rem: cfg.c_rem(),
        };
        r.ik = r.ik_upto(r.remainder.len());
        r
    }

    /// I_j for j <= k, from the same integrals.
    pub fn ik_upto(&self, j: usize) -> f64 {
        let mut v = self.dirichlet - self.c_hardy * self.hardy;
        for rem in &self.remainder[..j] {
            v -= self.c_rem * rem;
        }
        v
    }

    pub fn k(&self) -> usize {
        self.remainder.len()
    }
}

/// A value with its propagated quadrature error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err_est: f64,
}

/// Both sides of an inequality lhs >= rhs (or the reverse, see each function).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margin {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub err_est: f64,
}

impl Margin {
    pub fn holds(&self) -> bool {
        self.margin >= -self.err_est
    }

    fn zero() -> Self {
        Margin {
            lhs: 0.0,
            rhs: 0.0,
            margin: 0.0,
            err_est: 0.0,
        }
    }
}

/// Mesh over the support of `u` inside [0, r_hi].
pub fn profile_mesh<P: RadialProfile + ?Sized>(u: &P, r_hi: f64, cfg: &HardyConfig) -> Option<GradedMesh> {
    let hi = u.outer().min(r_hi);
    let lo = u.inner();
    if !(hi > lo) {
        return None;
    }
    Some(GradedMesh::with_breakpoints(lo, hi, &u.breakpoints(), &cfg.quad))
}

/// Support and origin conditions on a trial function.
pub fn check_admissible<P: RadialProfile + ?Sized>(u: &P, cfg: &HardyConfig) -> Result<()> {
    if u.outer() > cfg.big_r * (1.0 + 1e-12) {
        return Err(HardyError::Precondition(format!(
            "support of {} reaches {} beyond R = {}",
            u.name(),
            u.outer(),
            cfg.big_r
        )));
    }
    if cfg.regime() == Regime::Morrey && u.inner() == 0.0 {
        let scale = (0..=16)
            .map(|j| u.value(cfg.big_r * j as f64 / 16.0).abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        if u.value(0.0).abs() > 1e-12 * scale {
            return Err(HardyError::Precondition(format!("{} must vanish at the origin when p > n", u.name())));
        }
    }
    Ok(())
}

fn weights_at(cfg: &HardyConfig, depth: usize, r: f64) -> Weights {
    Weights::new(depth, (r / cfg.d).min(1.0)).expect("r/D in (0, 1]")
}

/// I_k[u; D] for a radial profile.
pub fn eval_ik<P: RadialProfile + ?Sized>(u: &P, cfg: &HardyConfig) -> Result<FunctionalReport> {
    cfg.validate()?;
    check_admissible(u, cfg)?;
    let k = cfg.k;
    let Some(mesh) = profile_mesh(u, cfg.big_r, cfg) else {
        return Ok(FunctionalReport::assemble(0.0, 0.0, vec![0.0; k], 0.0, cfg));
    };
    let (n, p) = (cfg.nf(), cfg.p);
    let q = integrate_radial_vec(
        |r, out| {
            let m = r.powf(n - 1.0);
            let up = u.value(r).abs().powf(p);
            out[0] = u.deriv(r).abs().powf(p) * m;
            let h = up * r.powf(n - 1.0 - p);
            out[1] = h;
            if k > 0 {
                let w = weights_at(cfg, k, r);
                for i in 1..=k {
                    out[1 + i] = h * w.y(i) * w.y(i);
                }
            }
        },
        k + 2,
        &mesh,
    )?;
    let s = cfg.surface();
    let remainder: Vec<f64> = q[2..].iter().map(|x| s * x.value).collect();
    let err = s * (q[0].err_est
        + cfg.c_hardy() * q[1].err_est
        + cfg.c_rem() * q[2..].iter().map(|x| x.err_est).sum::<f64>());
    Ok(FunctionalReport::assemble(s * q[0].value, s * q[1].value, remainder, err, cfg))
}

/// I_k[u; D] for u = phi(r) h_l(theta); the gradient term is integrated over
/// the sphere at every radial node.
pub fn eval_ik_separable(u: &SeparableProfile, cfg: &HardyConfig) -> Result<FunctionalReport> {
    cfg.validate()?;
    check_admissible(&u.radial, cfg)?;
    if u.harmonic.n != cfg.n {
        return Err(HardyError::Parameter("harmonic dimension differs from n".into()));
    }
    let k = cfg.k;
    let Some(mesh) = profile_mesh(&u.radial, cfg.big_r, cfg) else {
        return Ok(FunctionalReport::assemble(0.0, 0.0, vec![0.0; k], 0.0, cfg));
    };
    let (n, p) = (cfg.nf(), cfg.p);
    let hp = integrate_zonal(|th| u.harmonic.eval(th).0.abs().powf(p), cfg.n)?;
    let q = integrate_radial_vec(
        |r, out| {
            let m = r.powf(n - 1.0);
            match integrate_zonal(|th| u.grad_sq(r, th).powf(p / 2.0), cfg.n) {
                Ok(z) => {
                    out[0] = z.value * m;
                    out[k + 2] = z.err_est * m;
                }
                Err(_) => {
                    out[0] = f64::NAN;
                    out[k + 2] = f64::NAN;
                }
            }
            let h = u.radial.value(r).abs().powf(p) * r.powf(n - 1.0 - p) * hp.value;
            out[1] = h;
            if k > 0 {
                let w = weights_at(cfg, k, r);
                for i in 1..=k {
                    out[1 + i] = h * w.y(i) * w.y(i);
                }
            }
        },
        k + 3,
        &mesh,
    )?;
    let remainder: Vec<f64> = q[2..k + 2].iter().map(|x| x.value).collect();
    let rel_h = hp.err_est / hp.value.abs().max(f64::MIN_POSITIVE);
    let err = q[0].err_est
        + q[k + 2].value.abs()
        + cfg.c_hardy() * (q[1].err_est + rel_h * q[1].value.abs())
        + cfg.c_rem() * q[2..k + 2].iter().map(|x| x.err_est + rel_h * x.value.abs()).sum::<f64>();
    Ok(FunctionalReport::assemble(q[0].value, q[1].value, remainder, err, cfg))
}

/// (int |u|^p* Y_k^(1+p*/p) X_{k+1}^((1+p*/p) eps))^(p/p*); eps = 1 is the
/// full weight.
pub fn rhs_sobolev<P: RadialProfile + ?Sized>(u: &P, cfg: &HardyConfig, eps: f64) -> Result<Estimate> {
    let ps = cfg.p_star().ok_or(HardyError::Regime("p < n"))?;
    check_admissible(u, cfg)?;
    let Some(mesh) = profile_mesh(u, cfg.big_r, cfg) else {
        return Ok(Estimate { value: 0.0, err_est: 0.0 });
    };
    let e = 1.0 + ps / cfg.p;
    let (n, k) = (cfg.nf(), cfg.k);
    let q = integrate_radial_vec(
        |r, out| {
            let w = weights_at(cfg, k, r);
            out[0] = u.value(r).abs().powf(ps) * w.yk().powf(e) * w.next_x().powf(e * eps) * r.powf(n - 1.0);
        },
        1,
        &mesh,
    )?;
    Ok(power_estimate(cfg.surface() * q[0].value, cfg.surface() * q[0].err_est, cfg.p / ps))
}

fn power_estimate(v: f64, err: f64, theta: f64) -> Estimate {
    if v <= 0.0 {
        return Estimate {
            value: 0.0,
            err_est: err.max(0.0).powf(theta),
        };
    }
    Estimate {
        value: v.powf(theta),
        err_est: theta * v.powf(theta - 1.0) * err,
    }
}

/// Weight multiplying |u(x) - u(y)| at separation d in the Hoelder seminorm.
pub fn holder_weight(cfg: &HardyConfig, d: f64, eps: f64) -> f64 {
    let w = weights_at(cfg, cfg.k, d);
    let p = cfg.p;
    d.powf(cfg.nf() / p - 1.0) * w.yk().powf(1.0 / p) * w.next_x().powf(eps / p)
}

/// Location and value of the weighted Hoelder supremum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderSup {
    pub value: f64,
    pub r1: f64,
    pub r2: f64,
    pub angle: f64,
}

/// sup |u(x) - u(y)| |x-y|^(n/p-1) Y_k^(1/p) X_{k+1}^(eps/p) (|x-y|/D); eps = 1
/// is the full weight. Needs D >= diam.
pub fn rhs_holder<P: RadialProfile + ?Sized>(u: &P, cfg: &HardyConfig, eps: f64) -> Result<HolderSup> {
    if cfg.regime() != Regime::Morrey {
        return Err(HardyError::Regime("p > n"));
    }
    if cfg.d < cfg.diam() {
        return Err(HardyError::Precondition(format!("need D >= diam = {}", cfg.diam())));
    }
    check_admissible(u, cfg)?;
    let big_r = cfg.big_r;
    let s = sup_over_pairs(
        |r1, r2, th| {
            let du = (u.value(r1) - u.value(r2)).abs();
            if du == 0.0 {
                return 0.0;
            }
            let half = (0.5 * th).sin();
            let d = ((r1 - r2) * (r1 - r2) + 4.0 * r1 * r2 * half * half).sqrt();
            if d == 0.0 {
                return 0.0;
            }
            du * holder_weight(cfg, d, eps)
        },
        big_r,
        big_r * 1e-9,
        PAIR_ROUNDS,
    )?;
    Ok(HolderSup {
        value: s.value.max(0.0),
        r1: s.r1,
        r2: s.r2,
        angle: s.angle,
    })
}

/// sup |u(x)| |x|^(n/p - 1) Y_{k+1}^(1/p)(|x|/D); returns (value, argmax).
pub fn onepoint_sup<P: RadialProfile + ?Sized>(u: &P, cfg: &HardyConfig) -> Result<(f64, f64)> {
    if cfg.regime() != Regime::Morrey {
        return Err(HardyError::Regime("p > n"));
    }
    check_admissible(u, cfg)?;
    let (n, p, k) = (cfg.nf(), cfg.p, cfg.k);
    let (v, r) = sup_radial(
        |r| {
            let w = weights_at(cfg, k + 1, r);
            u.value(r).abs() * r.powf(n / p - 1.0) * w.y(k + 1).powf(1.0 / p)
        },
        cfg.big_r,
        cfg.big_r * 1e-12,
        4,
    )?;
    Ok((v.max(0.0), r))
}

/// Margin rhs - lhs of the elementary weighted Hardy inequality
/// int |w|^p |x|^-n Y_k X_{k+1}^2 <= p^p int |x|^(p-n) |grad w|^p Y_k^(1-p) X_{k+1}^(2-p).
pub fn anilog_check<P: RadialProfile + ?Sized>(w: &P, cfg: &HardyConfig) -> Result<Margin> {
    cfg.validate()?;
    check_admissible(w, cfg)?;
    let Some(mesh) = profile_mesh(w, cfg.big_r, cfg) else {
        return Ok(Margin::zero());
    };
    let (p, k) = (cfg.p, cfg.k);
    let q = integrate_radial_vec(
        |r, out| {
            let wt = weights_at(cfg, k, r);
            let (y, x) = (wt.yk(), wt.next_x());
            out[0] = w.value(r).abs().powf(p) / r * y * x * x;
            out[1] = r.powf(p - 1.0) * w.deriv(r).abs().powf(p) * y.powf(1.0 - p) * x.powf(2.0 - p);
        },
        2,
        &mesh,
    )?;
    // below r_min the weight integrates to X_{k+1}(r_min/D) exactly; |w|^p is frozen there
    let mut lhs = q[0].value;
    let mut lhs_err = q[0].err_est;
    if mesh.r_lo == 0.0 {
        let tail = w.value(mesh.r_min).abs().powf(p) * weights_at(cfg, k, mesh.r_min).next_x();
        lhs += tail;
        lhs_err = lhs_err - q[0].tail + 1e-6 * tail;
    }
    let s = cfg.surface();
    let lhs = s * lhs;
    let rhs = s * p.powf(p) * q[1].value;
    Ok(Margin {
        lhs,
        rhs,
        margin: rhs - lhs,
        err_est: s * (lhs_err + p.powf(p) * q[1].err_est),
    })
}

/// Margin lhs - rhs of the weighted Hardy inequality with trace term on the
/// centered ball B_r:
/// |q/(n-s)|^q int |grad v|^q |x|^(q-s) Y_k^g + q/(n-s) int_{dB_r} |v|^q |x|^-s Y_k^g x.nu
///   >= int |v|^q |x|^-s Y_k^g [1 + g q Z_k/(n-s)].
#[allow(clippy::too_many_arguments)]
pub fn trace_inequality_check<P: RadialProfile + ?Sized>(
    v: &P,
    cfg: &HardyConfig,
    q: f64,
    s: f64,
    gamma: f64,
    r: f64,
) -> Result<Margin> {
    let n = cfg.nf();
    if s == n || !(q >= 1.0) || gamma == 0.0 {
        return Err(HardyError::Parameter(format!(
            "need q >= 1, s != n, gamma != 0 (got q={q}, s={s}, gamma={gamma})"
        )));
    }
    if !(r > 0.0 && r <= cfg.d) {
        return Err(HardyError::Parameter(format!("radius {r} outside (0, D]")));
    }
    if s > n && v.inner() == 0.0 {
        return Err(HardyError::Precondition("s > n needs a profile vanishing near the origin".into()));
    }
    let k = cfg.k;
    let c = q / (n - s);
    let wr = weights_at(cfg, k, r);
    let boundary = c * v.value(r).abs().powf(q) * r.powf(n - s) * wr.yk().powf(gamma);
    let sf = cfg.surface();
    let Some(mesh) = profile_mesh(v, r, cfg) else {
        return Ok(Margin {
            lhs: sf * boundary,
            rhs: 0.0,
            margin: sf * boundary,
            err_est: 0.0,
        });
    };
    let cq = c.abs().powf(q);
    let qr = integrate_radial_vec(
        |rho, out| {
            let w = weights_at(cfg, k, rho);
            let yg = w.yk().powf(gamma);
            let m = rho.powf(n - 1.0 - s);
            out[0] = cq * v.deriv(rho).abs().powf(q) * rho.powf(q) * yg * m;
            out[1] = v.value(rho).abs().powf(q) * yg * (1.0 + gamma * q * w.zk() / (n - s)) * m;
        },
        2,
        &mesh,
    )?;
    let lhs = sf * (qr[0].value + boundary);
    let rhs = sf * qr[1].value;
    Ok(Margin {
        lhs,
        rhs,
        margin: lhs - rhs,
        err_est: sf * (qr[0].err_est + qr[1].err_est),
    })
}

/// Both sides of the local estimate on the centered ball B_r:
/// lhs = int_{B_r} |u|^q/|x|^q [1 - q^2 Z_k/(n(p-q))],
/// rhs = r^(n(1-q/p)) Y_{k+1}^(-q/p)(r/D) I_k^(q/p), without the constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalEstimate {
    pub lhs: f64,
    pub rhs: f64,
    pub err_est: f64,
    /// min over the ball of the bracket 1 - q^2 Z_k/(n(p-q)).
    pub bracket_min: f64,
}

pub fn local_estimate_check<P: RadialProfile + ?Sized>(
    u: &P,
    cfg: &HardyConfig,
    q: f64,
    r: f64,
) -> Result<LocalEstimate> {
    let (n, p, k) = (cfg.nf(), cfg.p, cfg.k);
    if p < 2.0 {
        return Err(HardyError::Regime("p >= 2"));
    }
    if !(q >= 1.0 && q < p) {
        return Err(HardyError::Parameter(format!("q = {q} outside [1, p)")));
    }
    if !(r > 0.0 && r <= cfg.d) {
        return Err(HardyError::Parameter(format!("radius {r} outside (0, D]")));
    }
    let bracket = |rho: f64| 1.0 - q * q * weights_at(cfg, k, rho).zk() / (n * (p - q));
    let ik = eval_ik(u, cfg)?;
    let wr = weights_at(cfg, k + 1, r);
    let rhs = r.powf(n * (1.0 - q / p)) * wr.y(k + 1).powf(-q / p) * ik.ik.max(0.0).powf(q / p);
    let Some(mesh) = profile_mesh(u, r, cfg) else {
        return Ok(LocalEstimate {
            lhs: 0.0,
            rhs,
            err_est: 0.0,
            bracket_min: bracket(r),
        });
    };
    let qr = integrate_radial_vec(
        |rho, out| out[0] = u.value(rho).abs().powf(q) * rho.powf(n - 1.0 - q) * bracket(rho),
        1,
        &mesh,
    )?;
    let sf = cfg.surface();
    Ok(LocalEstimate {
        lhs: sf * qr[0].value,
        rhs,
        err_est: sf * qr[0].err_est,
        bracket_min: bracket(r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::PolyBump;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_dirichlet_and_hardy() {
        let cfg = HardyConfig::new(3, 2.0, 0, 1.0, 1.0).unwrap();
        let u = PolyBump::new(1.0, 1.0, 1.0).unwrap();
        let r = eval_ik(&u, &cfg).unwrap();
        assert!((r.dirichlet - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((r.hardy - 4.0 * PI / 3.0).abs() < 1e-10);
        assert!((r.ik - PI).abs() < 1e-10);
    }

    #[test]
    fn zero_profile_gives_zero() {
        let cfg = HardyConfig::new(3, 2.0, 1, 1.0, 3.0).unwrap();
        let u = crate::profile::Scaled {
            base: PolyBump::new(1.0, 1.0, 1.0).unwrap(),
            c: 0.0,
        };
        assert_eq!(eval_ik(&u, &cfg).unwrap().ik, 0.0);
        assert_eq!(rhs_sobolev(&u, &cfg, 1.0).unwrap().value, 0.0);
    }
}
