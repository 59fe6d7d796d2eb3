//! Targeted evaluation at explicit lattice points: exact lower-bound sums via
//! [`point_probability`], and local-CLT estimates of series tails.
//!
//! For `n` beyond the dense range, `P(S_n = q)` is replaced by the local CLT
//! `2 prod_j (2 pi theta_j n)^{-1/2} exp(-sum_j q_j^2 / (2 theta_j n))` on the
//! parity class of `q`. Summing `A n^{-b/2}` times this over odd `n > N` gives
//! `A prod_j (2 pi theta_j)^{-1/2} int_N^inf n^{-(b+M)/2} e^{-c_q/n} dn`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::point::point_probability;
use super::project::Projector;
use super::series::SeriesWeights;
use super::WalkConfig;
use crate::numeric::{power_exp_tail, PI};
use crate::{Error, Result};

/// Local-CLT approximation of `P(S_n = q)`.
pub fn local_clt(cfg: &WalkConfig, n: u64, q: &[i64]) -> f64 {
    let l1: u64 = q.iter().map(|x| x.unsigned_abs()).sum();
    if (n + l1) % 2 == 1 || n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mut ln = 2f64.ln();
    for (&t, &x) in cfg.weights().iter().zip(q) {
        ln += -0.5 * (2.0 * PI * t * nf).ln() - (x as f64).powi(2) / (2.0 * t * nf);
    }
    ln.exp()
}

/// Lattice points with a given projection property.
#[derive(Clone, Debug)]
pub struct TargetSet {
    pub eps: f64,
    pub points: Vec<Vec<i64>>,
    /// Sup-norm radius of the non-unit coordinates that was searched.
    pub radius: u64,
}

impl TargetSet {
    /// Explicit points, each checked to satisfy `0 < |U(q)| <= eps` exactly.
    pub fn from_points(cfg: &WalkConfig, points: Vec<Vec<i64>>, eps: f64) -> Result<Self> {
        let proj = Projector::new(cfg);
        let zero = vec![0i64; proj.d()];
        let mut radius = 0;
        for q in &points {
            if q.len() != cfg.dim() {
                return Err(Error::Invalid("target has the wrong dimension".into()));
            }
            let p = proj.project(q, Some(&zero));
            if proj.support_mask(q, &p) == 0 || !proj.within(q, &p, eps)? {
                return Err(Error::Invalid(format!(
                    "target {q:?} is not in the punctured {eps}-ball"
                )));
            }
            radius = radius.max(q.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0));
        }
        Ok(TargetSet { eps, points, radius })
    }

    /// Every `q` with `|U(q)| <= eps` whose non-unit coordinates are bounded by
    /// `radius`, restricted to coordinate-sum parity `parity`.
    pub fn strip(cfg: &WalkConfig, eps: f64, radius: u64, parity: u32, include_zero: bool) -> Result<Self> {
        let f = cfg.freqs();
        let (d, m1) = (f.d(), f.m() + 1);
        let proj = Projector::new(cfg);
        let bar = f.bar_f64();
        // Candidates per axis: axis-blocks of q with |u_k| <= eps.
        let mut per_axis: Vec<Vec<(Vec<i64>, f64)>> = Vec::with_capacity(d);
        for k in 0..d {
            let mut cands = Vec::new();
            let mut idx = vec![-(radius as i64); m1 - 1];
            let r = radius as i64;
            loop {
                let s: f64 = idx
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| x as f64 * bar[k * m1 + i + 1])
                    .sum();
                let lo = (-s - eps).ceil() as i64 - 1;
                let hi = (-s + eps).floor() as i64 + 1;
                for q0 in lo..=hi {
                    let u = q0 as f64 + s;
                    if u.abs() <= eps * (1.0 + 1e-9) + 1e-12 {
                        let mut block = Vec::with_capacity(m1);
                        block.push(q0);
                        block.extend_from_slice(&idx);
                        cands.push((block, u));
                    }
                }
                let mut i = 0;
                loop {
                    if i == idx.len() {
                        break;
                    }
                    if idx[i] < r {
                        idx[i] += 1;
                        break;
                    }
                    idx[i] = -r;
                    i += 1;
                }
                if i == idx.len() {
                    break;
                }
            }
            per_axis.push(cands);
        }
        let zero = vec![0i64; d];
        let mut points = Vec::new();
        let mut pick = vec![0usize; d];
        if per_axis.iter().any(|c| c.is_empty()) {
            return Ok(TargetSet { eps, points, radius });
        }
        loop {
            let s2: f64 = (0..d).map(|k| per_axis[k][pick[k]].1.powi(2)).sum();
            if s2 <= eps * eps * (1.0 + 1e-9) + 1e-12 {
                let q: Vec<i64> = (0..d).flat_map(|k| per_axis[k][pick[k]].0.iter().copied()).collect();
                let l1: u64 = q.iter().map(|x| x.unsigned_abs()).sum();
                if l1 % 2 == parity as u64 {
                    let p = proj.project(&q, Some(&zero));
                    let nonzero = proj.support_mask(&q, &p) != 0;
                    if (nonzero || include_zero) && proj.within(&q, &p, eps)? {
                        points.push(q);
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == d {
                    break;
                }
                pick[k] += 1;
                if pick[k] < per_axis[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
        points.sort();
        Ok(TargetSet { eps, points, radius })
    }
}

/// Exact partial sum `sum_{nEps <= n <= nMax, n odd} n^{-beta/2} sum_q P(S_n = q)`
/// over the targets, by per-point composition sums.
///
/// When the targets lie in the punctured `eps`-ball this is a lower bound for
/// the dense `J_beta` partial sum at `eps`.
pub fn j_beta_targeted(cfg: &WalkConfig, beta: f64, targets: &TargetSet, n_eps: u32, n_max: u32) -> Result<f64> {
    if !(beta > 2.0) {
        return Err(Error::Invalid("beta must exceed 2".into()));
    }
    let mut s = 0.0;
    for n in n_eps.max(1)..=n_max {
        if n % 2 == 0 {
            continue;
        }
        let w = (n as f64).powf(-beta / 2.0);
        for q in &targets.points {
            s += w * point_probability(cfg, n as u64, q);
        }
    }
    Ok(s)
}

/// A local-CLT tail estimate over a strip of targets.
#[derive(Clone, Debug)]
pub struct AsymptoticSeries {
    pub tail: f64,
    pub targets: usize,
    pub radius: u64,
    /// Estimated share from targets beyond the searched radius (included in `tail`).
    pub beyond_radius: f64,
}

/// Axes whose extended tuple `(1, omega_[k])` is `Q`-linearly independent.
fn independent(cfg: &WalkConfig) -> bool {
    let f = cfg.freqs();
    (0..f.d()).all(|k| {
        let mut rads: Vec<u64> = f.row(k).iter().map(|s| s.radicand).collect();
        rads.push(1);
        rads.sort_unstable();
        rads.windows(2).all(|w| w[0] != w[1])
    })
}

/// `A prod_j (2 pi theta_j)^{-1/2} int_{N}^inf n^{-(b+M)/2} e^{-c_q/n} dn` for one target.
fn target_tail(theta: &[f64], a: f64, b: f64, q: &[i64], n_from: f64) -> f64 {
    let pref: f64 = theta.iter().map(|t| (2.0 * PI * t).powf(-0.5)).product();
    let c: f64 = theta.iter().zip(q).map(|(t, &x)| (x as f64).powi(2) / (2.0 * t)).sum();
    let s = (b + theta.len() as f64) / 2.0;
    a * pref * power_exp_tail(s, c, n_from)
}

/// Local-CLT estimate of `sum_{n > nMax, n odd} w(n) P(0 < |U_n| <= eps)`
/// (zero included when `include_zero`).
pub fn asymptotic_tail(
    cfg: &WalkConfig,
    weights: SeriesWeights,
    eps: f64,
    n_max: u32,
    include_zero: bool,
) -> Result<AsymptoticSeries> {
    if !independent(cfg) {
        return Err(Error::Invalid(
            "the asymptotic tail needs Q-independent frequencies on every axis".into(),
        ));
    }
    let f = cfg.freqs();
    let (d, m) = (f.d(), f.m());
    let (a, b) = weights.asymptotics();
    if m == 0 {
        // U_n = S_n: targets are the nonzero lattice points in the eps-ball.
        let r = eps.floor() as u64;
        let set = TargetSet::strip(cfg, eps, 0, 1, include_zero)?;
        let n_from = first_odd_after(n_max) - 1.0;
        let tail = set
            .points
            .iter()
            .map(|q| target_tail(cfg.weights(), a, b, q, n_from))
            .sum();
        return Ok(AsymptoticSeries {
            tail,
            targets: set.points.len(),
            radius: r,
            beyond_radius: 0.0,
        });
    }
    // Box radius: enough to hold targets well past the dominant scale, capped by
    // the enumeration budget.
    let budget: f64 = 4.0e6;
    let cap = (budget.powf(1.0 / (d * m) as f64) / 2.0).floor().max(8.0) as u64;
    let dominant = (eps.powf(-1.0 / m as f64) * 64.0).max((n_max as f64).sqrt() * 16.0);
    let radius = (dominant as u64).clamp(8, cap);
    let set = TargetSet::strip(cfg, eps, radius, 1, include_zero)?;
    let n_from = first_odd_after(n_max) - 1.0;
    let mut tail = 0.0;
    let mut shell = 0.0;
    for q in &set.points {
        let t = target_tail(cfg.weights(), a, b, q, n_from);
        tail += t;
        let sup = (0..d)
            .flat_map(|k| q[k * (m + 1) + 1..(k + 1) * (m + 1)].iter())
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0);
        if 2 * sup > radius {
            shell += t;
        }
    }
    // Each doubling of the radius multiplies the shell share by 2^{-(b + d - 2)}.
    let ratio = 2f64.powf(-(b + d as f64 - 2.0));
    let beyond = if ratio < 1.0 {
        shell * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    Ok(AsymptoticSeries {
        tail: tail + beyond,
        targets: set.points.len(),
        radius,
        beyond_radius: beyond,
    })
}

fn first_odd_after(n: u32) -> f64 {
    (if n % 2 == 0 { n + 1 } else { n + 2 }) as f64
}
