use crate::error::{HardyError, Result};
use crate::quad::{ball_volume, QuadSettings};
use crate::weights::MAX_DEPTH;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// p < n
    Subcritical,
    /// p > n
    Morrey,
}

/// Problem data: dimension n, exponent p, depth k, ball radius R and weight scale D.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardyConfig {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub big_r: f64,
    pub d: f64,
    pub quad: QuadSettings,
}

impl HardyConfig {
    pub fn new(n: usize, p: f64, k: usize, big_r: f64, d: f64) -> Result<Self> {
        let cfg = HardyConfig {
            n,
            p,
            k,
            big_r,
            d,
            quad: QuadSettings::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// D = mult * diam(ball) = 2 mult R.
    pub fn with_diam_mult(n: usize, p: f64, k: usize, big_r: f64, mult: f64) -> Result<Self> {
        Self::new(n, p, k, big_r, mult * 2.0 * big_r)
    }

    pub fn with_quad(mut self, quad: QuadSettings) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(HardyError::Parameter(format!("dimension n = {} < 2", self.n)));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(HardyError::Parameter(format!("exponent p = {} must exceed 1", self.p)));
        }
        if self.p == self.n as f64 {
            return Err(HardyError::Parameter(format!("p = n = {} is excluded", self.n)));
        }
        if self.k > MAX_DEPTH {
            return Err(HardyError::Depth(self.k));
        }
        if !(self.big_r > 0.0) || !self.big_r.is_finite() {
            return Err(HardyError::Parameter(format!("radius R = {} must be positive", self.big_r)));
        }
        if !(self.d >= self.big_r) || !self.d.is_finite() {
            return Err(HardyError::Parameter(format!(
                "scale D = {} must be at least R = {}",
                self.d, self.big_r
            )));
        }
        self.quad.validate()
    }

    pub fn regime(&self) -> Regime {
        if self.p < self.n as f64 {
            Regime::Subcritical
        } else {
            Regime::Morrey
        }
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// np/(n - p) for p < n.
    pub fn p_star(&self) -> Option<f64> {
        match self.regime() {
            Regime::Subcritical => Some(self.nf() * self.p / (self.nf() - self.p)),
            Regime::Morrey => None,
        }
    }

    pub fn omega_n(&self) -> f64 {
        ball_volume(self.n)
    }

    /// n * omega_n, the area of the unit sphere.
    pub fn surface(&self) -> f64 {
        self.nf() * self.omega_n()
    }

    pub fn diam(&self) -> f64 {
        2.0 * self.big_r
    }

    /// (p - n)/p
    pub fn a0(&self) -> f64 {
        (self.p - self.nf()) / self.p
    }

    /// |(n - p)/p|^p
    pub fn c_hardy(&self) -> f64 {
        self.a0().abs().powf(self.p)
    }

    /// ((p - 1)/(2p)) |(n - p)/p|^(p - 2)
    pub fn c_rem(&self) -> f64 {
        (self.p - 1.0) / (2.0 * self.p) * self.a0().abs().powf(self.p - 2.0)
    }

    pub fn sign(&self) -> f64 {
        if self.p < self.nf() {
            1.0
        } else {
            -1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tuples() {
        assert!(HardyConfig::new(3, 3.0, 1, 1.0, 2.0).is_err());
        assert!(HardyConfig::new(3, 2.0, 1, 1.0, 0.5).is_err());
        assert!(HardyConfig::new(1, 2.0, 1, 1.0, 2.0).is_err());
        assert!(HardyConfig::new(3, 1.0, 1, 1.0, 2.0).is_err());
        assert!(HardyConfig::new(3, 2.0, 65, 1.0, 2.0).is_err());
    }

    #[test]
    fn constants() {
        let c = HardyConfig::new(3, 2.0, 0, 1.0, 1.0).unwrap();
        assert_eq!(c.p_star(), Some(6.0));
        assert!((c.c_hardy() - 0.25).abs() < 1e-15);
        assert!((c.c_rem() - 0.25).abs() < 1e-15);
        let m = HardyConfig::new(3, 6.0, 0, 1.0, 2.0).unwrap();
        assert_eq!(m.regime(), Regime::Morrey);
        assert_eq!(m.sign(), -1.0);
    }
}
