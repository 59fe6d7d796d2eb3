//! Numerical checks of the Gaussian envelope, the parity-restricted Gauss sum
//! and the two-sided binomial estimate.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{Evolution, WalkConfig};
use crate::numeric::{ln_binom_pmf, PI};
use crate::{Error, Result};

/// Exponent constant of the envelope; any value below `min_j 1/(2 theta_j)` works.
pub const ENVELOPE_EXPONENT: f64 = 0.25;

/// Result of [`envelope_fit`].
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeFit {
    /// Smallest constant with `P <= c n^{-M/2} exp(-cExp |q|^2 / n)` over the data.
    pub c_upper: f64,
    pub c_exp: f64,
    /// Analytic reference constant `4 prod_j (2 pi theta_j)^{-1/2}`.
    pub c_reference: f64,
    /// Support points above the reference envelope.
    pub violations: u64,
    pub points: u64,
    pub n_max: u32,
}

/// Fits the upper envelope over every retained support point with `1 <= n <= nMax`.
///
/// With `prune > 0`, points below the threshold are not visited.
pub fn envelope_fit(cfg: &WalkConfig, n_max: u32, prune: f64) -> Result<EnvelopeFit> {
    if n_max < 4 {
        return Err(Error::Invalid("envelope fit needs nMax >= 4".into()));
    }
    let m = cfg.dim() as f64;
    let c_reference = 4.0 * cfg.weights().iter().map(|t| (2.0 * PI * t).powf(-0.5)).product::<f64>();
    let mut ev = Evolution::new(cfg, prune)?;
    let mut c_upper: f64 = 0.0;
    let mut violations = 0;
    let mut points = 0;
    for n in 1..=n_max {
        ev.step()?;
        let nf = n as f64;
        ev.current().for_each_orbit(|x, p| {
            let r2: f64 = x.iter().map(|&a| (a as f64).powi(2)).sum();
            let ln_ratio = p.ln() + 0.5 * m * nf.ln() + ENVELOPE_EXPONENT * r2 / nf;
            let ratio = ln_ratio.exp();
            c_upper = c_upper.max(ratio);
            if ratio > c_reference {
                violations += 1;
            }
            points += 1;
        });
    }
    Ok(EnvelopeFit {
        c_upper,
        c_exp: ENVELOPE_EXPONENT,
        c_reference,
        violations,
        points,
        n_max,
    })
}

/// Ratios `n^{-d/2} sum_{x in Z^d, x = i mod 2} exp(-theta |x|^2 / n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussSumBounds {
    pub ratios: Vec<(u64, f64)>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Large-`n` limit `(pi / theta)^{d/2} / 2`.
    pub limit: f64,
}

/// One-dimensional sums split by parity.
fn gauss_1d(theta: f64, n: f64) -> (f64, f64) {
    let xmax = (n * 60.0 / theta).sqrt().ceil() as i64 + 1;
    let (mut even, mut odd) = (1.0, 0.0);
    for x in 1..=xmax {
        let v = 2.0 * (-theta * (x * x) as f64 / n).exp();
        if x % 2 == 0 {
            even += v;
        } else {
            odd += v;
        }
    }
    (even, odd)
}

/// Evaluates the parity-restricted Gauss sum over `ns`.
pub fn gauss_sum_check(d: usize, theta: f64, parity: u32, ns: &[u64]) -> Result<GaussSumBounds> {
    if d == 0 || !(theta > 0.0) || parity > 1 || ns.is_empty() {
        return Err(Error::Invalid(
            "need d >= 1, theta > 0, parity in {0, 1} and some n".into(),
        ));
    }
    let mut ratios = Vec::with_capacity(ns.len());
    for &n in ns {
        let nf = n as f64;
        let (e1, o1) = gauss_1d(theta, nf);
        // Parity classes multiply like (E + O t)^d with t^2 = 1.
        let (mut e, mut o) = (1.0, 0.0);
        for _ in 0..d {
            let ne = e * e1 + o * o1;
            let no = e * o1 + o * e1;
            e = ne;
            o = no;
        }
        let s = if parity == 0 { e } else { o };
        ratios.push((n, s / nf.powf(d as f64 / 2.0)));
    }
    let min_ratio = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(GaussSumBounds {
        ratios,
        min_ratio,
        max_ratio,
        limit: (PI / theta).powf(d as f64 / 2.0) / 2.0,
    })
}

/// Result of [`binomial_envelope_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialEnvelope {
    pub theta: f64,
    /// Analytic two-sided constants and rates around `m^{-1/2} exp(-k m eps^2)`.
    pub upper_const: f64,
    pub upper_rate: f64,
    pub lower_const: f64,
    pub lower_rate: f64,
    /// Fitted constants: `max` and `min` of `P m^{1/2} exp(k m eps^2)` at the two rates.
    pub fitted_upper: f64,
    pub fitted_lower: f64,
    pub violations: u64,
    pub checked: u64,
    /// Grid points outside `|eps| <= cBin theta` or with `m < 2`.
    pub excluded: u64,
}

/// Half-width of the admissible deviation window, as a fraction of `theta`.
pub const C_BIN: f64 = 0.5;

/// Checks `P(B = floor(m (theta + eps))) = Theta(m^{-1/2} exp(-Theta m eps^2))`.
pub fn binomial_envelope_check(theta: f64, ms: &[u64], eps_grid: &[f64]) -> Result<BinomialEnvelope> {
    if !(theta > 0.0 && theta <= 0.75) {
        return Err(Error::Invalid("theta must lie in (0, 0.75]".into()));
    }
    let v = theta * (1.0 - theta);
    let k_star = 1.0 / (2.0 * v);
    let base = (2.0 * PI * v).powf(-0.5);
    let (upper_const, upper_rate) = (3.0 * base, k_star / 2.0);
    let (lower_const, lower_rate) = (base / 3.0, 2.0 * k_star);
    let mut fitted_upper: f64 = 0.0;
    let mut fitted_lower = f64::INFINITY;
    let (mut violations, mut checked, mut excluded) = (0, 0, 0);
    for &m in ms {
        for &eps in eps_grid {
            if m < 2 || eps.abs() > C_BIN * theta {
                excluded += 1;
                continue;
            }
            let mf = m as f64;
            let k = (mf * (theta + eps)).floor() as u64;
            let lp = ln_binom_pmf(k, m, theta);
            let s = 0.5 * mf.ln();
            let up = (lp + s + upper_rate * mf * eps * eps).exp();
            let lo = (lp + s + lower_rate * mf * eps * eps).exp();
            fitted_upper = fitted_upper.max(up);
            fitted_lower = fitted_lower.min(lo);
            if up > upper_const || lo < lower_const {
                violations += 1;
            }
            checked += 1;
        }
    }
    Ok(BinomialEnvelope {
        theta,
        upper_const,
        upper_rate,
        lower_const,
        lower_rate,
        fitted_upper,
        fitted_lower,
        violations,
        checked,
        excluded,
    })
}
