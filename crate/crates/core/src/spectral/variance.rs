//! Excursion variance as a series over convolution powers of the spectral measure:
//!
//! `Var(Leb({X > u} cap B(0,T))) = T^{2d} sum_k c_k E[gamma-hat(T U_k)^2]`,
//!
//! with `c_k = alpha_k / (2 pi)` at `u = 0` and `c_k = alpha_{k,u}` otherwise.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::arcsine::{gamma_u, level_coefficients};
use super::window::window_hat;
use crate::numeric::{normal_pdf, unit_ball_volume, PI};
use crate::walk::{Evolution, WalkConfig};
use crate::{Error, Result};

pub const NORMALIZATION: &str = "T^2d/(2pi)";

/// One window scale of a variance report.
#[derive(Clone, Debug, PartialEq)]
pub struct VariancePoint {
    pub t: f64,
    /// `T^{2d}` times the partial sum.
    pub v_lo: f64,
    /// `v_lo` plus the rigorous coefficient tail and the pruned-mass inflation.
    pub v_hi: f64,
    /// `v_lo` plus the asymptotic tail estimate.
    pub v_est: f64,
    pub crude_tail: f64,
    pub asymptotic_tail: f64,
    pub lost_inflation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceReport {
    pub d: usize,
    pub u: f64,
    pub n_max: u32,
    pub prune: f64,
    pub normalization: &'static str,
    pub points: Vec<VariancePoint>,
    /// Optional Monte Carlo `(estimate, stderr)` per point, filled by callers.
    pub mc_cross_check: Vec<Option<(f64, f64)>>,
}

/// `E[gamma-hat(T U_k)^2]` for every `k <= nMax` with `coeff(k) != 0`, and lost mass.
///
/// Sign images of a cell are folded into a per-cell cache, reused across `k`
/// until the lattice buffers are relaid.
fn window_moments(
    cfg: &WalkConfig,
    ts: &[f64],
    n_max: u32,
    prune: f64,
    use_k: &dyn Fn(u64) -> bool,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let f = cfg.freqs();
    let (d, m1) = (f.d(), f.m() + 1);
    if d > 3 {
        return Err(Error::Invalid("the ball window is implemented for d <= 3".into()));
    }
    let bar = f.bar_f64();
    let mut ev = Evolution::new(cfg, prune)?;
    let mut moments = vec![vec![0.0; n_max as usize + 1]; ts.len()];
    let mut lost = vec![0.0; n_max as usize + 1];
    let mut cache: Vec<Vec<f64>> = Vec::new();
    let mut version = u64::MAX;
    let mut u = vec![0.0; d];
    for k in 0..=n_max {
        if k > 0 {
            ev.step()?;
        }
        lost[k as usize] = ev.current().lost_mass();
        if !use_k(k as u64) {
            continue;
        }
        if ev.layout_version() != version {
            version = ev.layout_version();
            let len = ev.current().layout_len();
            cache = vec![vec![f64::NAN; len]; ts.len()];
        }
        let dist = ev.current();
        let mut acc = vec![0.0; ts.len()];
        dist.for_each_orbit_indexed(|idx, x, p| {
            if cache[0][idx].is_nan() {
                let nz: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0).collect();
                let mut g = vec![0.0; ts.len()];
                for mask in 0u32..(1u32 << nz.len()) {
                    u.iter_mut().for_each(|v| *v = 0.0);
                    let mut b = 0;
                    for (j, &a) in x.iter().enumerate() {
                        if a == 0 {
                            continue;
                        }
                        let s = if mask >> b & 1 == 1 { -1.0 } else { 1.0 };
                        b += 1;
                        u[j / m1] += s * a as f64 * bar[j];
                    }
                    let r = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                    for (gi, &t) in g.iter_mut().zip(ts) {
                        *gi += window_hat(d, t * r).powi(2);
                    }
                }
                for (c, gi) in cache.iter_mut().zip(g) {
                    c[idx] = gi;
                }
            }
            for (a, c) in acc.iter_mut().zip(&cache) {
                *a += p * c[idx];
            }
        });
        for (mt, a) in moments.iter_mut().zip(acc) {
            mt[k as usize] = a;
        }
    }
    Ok((moments, lost))
}

/// Continuum estimate `E[gamma-hat(T U_k)^2] ~ (2pi)^d kappa T^{-d} (2 pi k)^{-d/2} prod sigma_j^{-1}`
/// without the `k` factor: returns the coefficient of `k^{-d/2}`.
fn continuum_coeff(cfg: &WalkConfig, t: f64) -> f64 {
    let d = cfg.freqs().d();
    let df = d as f64;
    let det: f64 = cfg.axis_variances().iter().product();
    (2.0 * PI).powf(df) * unit_ball_volume(d) * t.powf(-df) * (2.0 * PI).powf(-df / 2.0) / det.sqrt()
}

/// Coefficient table length; beyond it tails use the `k^{-3/2}` asymptotics.
const TABLE_LEN: usize = 1_000_000;

/// `sum_{k > N} c_k min(kappa^2, C k^{-d/2})` from the table plus an integral
/// remainder, where `c_k ~ a k^{-3/2}` on average beyond the table.
///
/// The continuum moment `C k^{-d/2}` only holds once the walk outgrows the
/// window; below that it is capped by the exact maximum `kappa^2`, so the
/// estimate never exceeds the crude tail.
fn capped_tail(coeff: &[f64], n_max: u32, d: usize, a: f64, c: f64, kappa2: f64) -> f64 {
    let df = d as f64;
    let mut s = 0.0;
    for k in n_max as usize + 1..coeff.len() {
        s += coeff[k] * kappa2.min(c * (k as f64).powf(-df / 2.0));
    }
    let e = (1.0 + df) / 2.0;
    let l = coeff.len() as f64;
    let k_star = (c / kappa2).powf(2.0 / df);
    if k_star > l {
        s + a * kappa2 * 2.0 * (l.powf(-0.5) - k_star.powf(-0.5)) + a * c * k_star.powf(-e) / e
    } else {
        s + a * c * l.powf(-e) / e
    }
}

/// `c_k = alpha_k / (2 pi)` for `k < len`.
fn arcsine_table(len: usize) -> Vec<f64> {
    let mut c = vec![0.0; len];
    let mut alpha = 1.0;
    let mut k = 1;
    while k < len {
        c[k] = alpha / (2.0 * PI);
        let j = k.div_ceil(2) as f64;
        alpha *= (2.0 * j - 1.0) * (2.0 * j - 1.0) / ((2.0 * j) * (2.0 * j + 1.0));
        k += 2;
    }
    c
}

/// `(phi(u) He_{k-1}(u))^2 / k!` for `k < len`, through the normalized
/// recurrence `h_j = He_j / sqrt(j!)`, which is stable for large `k`.
fn hermite_table(u: f64, len: usize) -> Vec<f64> {
    let mut c = vec![0.0; len];
    let p2 = normal_pdf(u).powi(2);
    let (mut a, mut b) = (0.0, 1.0);
    for k in 1..len {
        // b = h_{k-1}, a = h_{k-2}
        c[k] = p2 * b * b / k as f64;
        let j = (k - 1) as f64;
        let next = (u * b - j.sqrt() * a) / (j + 1.0).sqrt();
        a = b;
        b = next;
    }
    c
}

#[allow(clippy::too_many_arguments)]
fn build_points(
    cfg: &WalkConfig,
    ts: &[f64],
    n_max: u32,
    moments: &[Vec<f64>],
    lost: &[f64],
    coeff: &[f64],
    coeff_total: f64,
    a: f64,
    origin_tail: f64,
) -> Vec<VariancePoint> {
    let d = cfg.freqs().d();
    let kappa = unit_ball_volume(d);
    let used: f64 = coeff[1..=n_max as usize].iter().sum();
    let coeff_tail = (coeff_total - used).max(0.0);
    ts.iter()
        .enumerate()
        .map(|(i, &t)| {
            let scale = t.powi(2 * d as i32);
            let mut partial = 0.0;
            let mut lost_inf = 0.0;
            for k in 1..=n_max as usize {
                let c = coeff[k];
                if c == 0.0 {
                    continue;
                }
                partial += c * moments[i][k];
                lost_inf += c.abs() * lost[k] * kappa * kappa;
            }
            let crude = coeff_tail * kappa * kappa;
            let asym =
                capped_tail(coeff, n_max, d, a, continuum_coeff(cfg, t), kappa * kappa) + origin_tail * kappa * kappa;
            VariancePoint {
                t,
                v_lo: scale * partial,
                v_hi: scale * (partial + crude + lost_inf),
                v_est: scale * (partial + asym),
                crude_tail: scale * crude,
                asymptotic_tail: scale * asym,
                lost_inflation: scale * lost_inf,
            }
        })
        .collect()
}

fn check_ts(ts: &[f64]) -> Result<()> {
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::Invalid("window scales must be positive".into()));
    }
    Ok(())
}

/// `V(T)` at `u = 0` for several window scales sharing one evolution.
pub fn variance_multi(cfg: &WalkConfig, ts: &[f64], n_max: u32, prune: f64) -> Result<VarianceReport> {
    check_ts(ts)?;
    let d = cfg.freqs().d();
    let coeff = arcsine_table(TABLE_LEN.max(n_max as usize + 1));
    let (moments, lost) = window_moments(cfg, ts, n_max, prune, &|k| k % 2 == 1)?;
    let a = (2.0 / PI).sqrt() / (2.0 * PI) / 2.0;
    let points = build_points(cfg, ts, n_max, &moments, &lost, &coeff, 0.25, a, 0.0);
    Ok(VarianceReport {
        d,
        u: 0.0,
        n_max,
        prune,
        normalization: NORMALIZATION,
        mc_cross_check: vec![None; points.len()],
        points,
    })
}

/// `V(T)` at `u = 0`.
pub fn variance_series(cfg: &WalkConfig, t: f64, n_max: u32, prune: f64) -> Result<VarianceReport> {
    variance_multi(cfg, &[t], n_max, prune)
}

/// Degree of the polynomial fit for the level-`u` coefficients.
pub const LEVEL_FIT_DEGREE: usize = 8;

/// `alpha_{k,u}` for `k < len`: fitted for `k <= 8`, the Hermite closed form beyond.
pub fn level_coefficient_table(u: f64, len: usize) -> Vec<f64> {
    let mut c = hermite_table(u, len);
    let fitted = level_coefficients(u, LEVEL_FIT_DEGREE);
    let n = fitted.len().min(len);
    if n > 1 {
        c[1..n].copy_from_slice(&fitted[1..n]);
    }
    c
}

/// Variance of the level-`u` excursion volume.
pub fn level_variance(cfg: &WalkConfig, u: f64, ts: &[f64], n_max: u32, prune: f64) -> Result<VarianceReport> {
    check_ts(ts)?;
    if u == 0.0 {
        return variance_multi(cfg, ts, n_max, prune);
    }
    let d = cfg.freqs().d();
    let coeff = level_coefficient_table(u, TABLE_LEN.max(n_max as usize + 1));
    let (moments, lost) = window_moments(cfg, ts, n_max, prune, &|k| k >= 1)?;
    let total = gamma_u(1.0, u);
    // Hermite tail for k > nMax: the normalized Hermite functions make
    // c_k ~ phi(u)^2 e^{u^2/2} sqrt(2/pi) k^{-3/2} cos^2(.), averaging to half.
    let a = normal_pdf(u).powi(2) * (u * u / 2.0).exp() * (2.0 / PI).sqrt() / 2.0;
    // Return to the origin at even k: P(S_k = 0) ~ 2 prod (2 pi theta_j k)^{-1/2}.
    let mdim = cfg.dim() as f64;
    let pref: f64 = 2.0 * cfg.weights().iter().map(|t| (2.0 * PI * t).powf(-0.5)).product::<f64>();
    let mut origin = 0.0;
    let mut k = n_max as usize + 1;
    if k % 2 == 1 {
        k += 1;
    }
    while k < coeff.len() {
        origin += coeff[k] * pref * (k as f64).powf(-mdim / 2.0);
        k += 2;
    }
    let points = build_points(cfg, ts, n_max, &moments, &lost, &coeff, total, a, origin);
    Ok(VarianceReport {
        d,
        u,
        n_max,
        prune,
        normalization: NORMALIZATION,
        mc_cross_check: vec![None; points.len()],
        points,
    })
}
