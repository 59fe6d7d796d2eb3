use alloc::format;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// `psi(q) = c q^{-tau} ln(1+q)^p`.
///
/// `q0` is the smallest integer from which `psi` is at most one and strictly
/// decreasing on the integers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularPsi {
    pub tau: f64,
    pub c: f64,
    pub p: f64,
    q0: u64,
}

const Q_LIMIT: f64 = 1e15;

impl RegularPsi {
    pub fn new(tau: f64, c: f64, p: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) || !(c > 0.0 && c.is_finite()) || !p.is_finite() {
            return Err(Error::Invalid(format!(
                "need tau > 0, c > 0, finite p (got {tau}, {c}, {p})"
            )));
        }
        let mut psi = RegularPsi { tau, c, p, q0: 1 };
        psi.q0 = psi.find_q0()?;
        Ok(psi)
    }

    /// `c q^{-tau}`.
    pub fn power(tau: f64, c: f64) -> Result<Self> {
        RegularPsi::new(tau, c, 0.0)
    }

    pub fn q0(&self) -> u64 {
        self.q0
    }

    pub fn eval(&self, q: f64) -> f64 {
        let pow = if self.tau.fract() == 0.0 && self.tau <= 64.0 {
            q.powi(self.tau as i32)
        } else {
            q.powf(self.tau)
        };
        let log = if self.p == 0.0 { 1.0 } else { q.ln_1p().powf(self.p) };
        self.c / pow * log
    }

    fn decreasing_at(&self, q: f64) -> bool {
        self.eval(q + 1.0) < self.eval(q)
    }

    fn find_q0(&self) -> Result<u64> {
        // Beyond q_s the continuous derivative of ln psi stays negative.
        let q_s = if self.p <= 0.0 {
            1.0
        } else {
            let x = (self.p / self.tau - 1.0).max(0.0).exp();
            let mut q = x.ceil().max(1.0);
            while !(self.tau * (1.0 + q) * q.ln_1p() > self.p * q) {
                q *= 2.0;
                if q > Q_LIMIT {
                    return Err(Error::Invalid("psi is not eventually decreasing in range".into()));
                }
            }
            q
        };
        let mut q = q_s as u64;
        while q > 1 && self.decreasing_at((q - 1) as f64) {
            q -= 1;
        }
        // First point of the decreasing tail with psi <= 1.
        if self.eval(q as f64) <= 1.0 {
            return Ok(q);
        }
        let mut hi = q.max(1);
        while self.eval(hi as f64) > 1.0 {
            hi = hi
                .checked_mul(2)
                .filter(|&h| (h as f64) < Q_LIMIT)
                .ok_or_else(|| Error::Invalid("psi does not drop below 1 in range".into()))?;
        }
        let mut lo = q;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid as f64) <= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `min { q >= 1 : psi(q) <= eps }`.
    pub fn inverse(&self, eps: f64) -> Result<u64> {
        if !(eps > 0.0) {
            return Err(Error::Invalid("eps must be positive".into()));
        }
        for q in 1..self.q0 {
            if self.eval(q as f64) <= eps {
                return Ok(q);
            }
        }
        if self.eval(self.q0 as f64) <= eps {
            return Ok(self.q0);
        }
        let mut lo = self.q0;
        let mut hi = self.q0.max(1);
        while self.eval(hi as f64) > eps {
            lo = hi;
            hi = hi
                .checked_mul(2)
                .filter(|&h| (h as f64) < Q_LIMIT)
                .ok_or_else(|| Error::Invalid(format!("psi^-1({eps}) beyond range")))?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid as f64) <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}
