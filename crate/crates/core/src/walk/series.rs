//! Recurrence series `J_beta`, `I_beta` and the structure-factor ball sum,
//! truncated at `nMax` with explicit tail terms.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::project::Projector;
use super::targeted::asymptotic_tail;
use super::{Evolution, WalkConfig};
use crate::spectral::arcsine_coeff;
use crate::{Error, Result};

/// Default prune threshold for series evaluation.
pub const DEFAULT_PRUNE: f64 = 1e-16;

/// Summation weights `w(n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeriesWeights {
    /// `n^{-beta/2}`.
    Power { beta: f64 },
    /// `a_n = alpha_n / (2 pi)`, zero for even `n`.
    Arcsine,
}

impl SeriesWeights {
    pub fn weight(&self, n: u64) -> f64 {
        match *self {
            SeriesWeights::Power { beta } => (n as f64).powf(-beta / 2.0),
            SeriesWeights::Arcsine => arcsine_coeff(n) / (2.0 * crate::numeric::PI),
        }
    }

    /// Rigorous bound on `sum_{n > nMax} w(n)`.
    pub fn crude_tail(&self, n_max: u64) -> f64 {
        match *self {
            SeriesWeights::Power { beta } => 2.0 * (n_max as f64).powf(1.0 - beta / 2.0) / (beta - 2.0),
            SeriesWeights::Arcsine => {
                // sum_n a_n = arcsin(1) / (2 pi) = 1/4.
                let mut s = 0.0;
                let mut alpha = 1.0;
                let mut n = 1u64;
                while n <= n_max {
                    s += alpha;
                    let k = n.div_ceil(2);
                    alpha *= ((2 * k - 1) * (2 * k - 1)) as f64 / ((2 * k) * (2 * k + 1)) as f64;
                    n += 2;
                }
                (0.25 - s / (2.0 * crate::numeric::PI)).max(0.0)
            }
        }
    }

    /// Leading asymptotics `w(n) ~ A n^{-b/2}` as `(A, b)`.
    pub fn asymptotics(&self) -> (f64, f64) {
        match *self {
            SeriesWeights::Power { beta } => (1.0, beta),
            SeriesWeights::Arcsine => {
                let pi = crate::numeric::PI;
                ((2.0 / pi).sqrt() / (2.0 * pi), 3.0)
            }
        }
    }
}

/// Which probability the series sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    /// Odd `n`, `P(0 < |U_n| <= eps)`.
    Real,
    /// All `n`, `P(0 < |U-bar_n| <= eps)`.
    Torus,
    /// Odd `n`, `P(|U_n| <= eps)` (closed ball, zero included).
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMode {
    /// Summand bounded by one.
    Crude,
    /// Crude tail times the largest summand probability over the last decade.
    Envelope,
    /// Local-CLT estimate of the tail over explicit targets (not a bound).
    Asymptotic,
}

impl TailMode {
    pub fn name(&self) -> &'static str {
        match self {
            TailMode::Crude => "crude",
            TailMode::Envelope => "envelope",
            TailMode::Asymptotic => "asymptotic",
        }
    }
}

/// A truncated series with its tail terms.
#[derive(Clone, Debug, PartialEq)]
pub struct TailedSum {
    pub partial: f64,
    pub n_truncation: u32,
    pub mode: TailMode,
    pub crude_tail: f64,
    pub envelope_tail: f64,
    pub asymptotic_tail: Option<f64>,
    /// `sum_n w(n) lostMass(n)`.
    pub lost_inflation: f64,
}

impl TailedSum {
    /// The tail of the selected mode.
    pub fn tail(&self) -> f64 {
        match self.mode {
            TailMode::Crude => self.crude_tail,
            TailMode::Envelope => self.envelope_tail,
            TailMode::Asymptotic => self.asymptotic_tail.unwrap_or(self.crude_tail),
        }
    }

    pub fn lo(&self) -> f64 {
        self.partial
    }

    /// Upper end: partial, tail and pruned-mass inflation.
    pub fn hi(&self) -> f64 {
        self.partial + self.tail() + self.lost_inflation
    }

    /// Point estimate: partial plus the asymptotic tail when present.
    pub fn estimate(&self) -> f64 {
        self.partial + self.asymptotic_tail.unwrap_or(0.0)
    }
}

/// A series evaluation over a grid of radii sharing one evolution.
#[derive(Clone, Debug)]
pub struct SeriesRequest {
    pub weights: SeriesWeights,
    pub statistic: Statistic,
    pub eps: Vec<f64>,
    pub n_eps: u32,
    pub n_max: u32,
    pub mode: TailMode,
    pub prune: f64,
}

/// Per-`n` probabilities for every radius, from one pass over the dense law.
#[derive(Clone, Debug)]
pub struct StatisticTable {
    /// `probs[e][n]`.
    pub probs: Vec<Vec<f64>>,
    pub lost: Vec<f64>,
}

/// Evaluates the statistic at every `n <= nMax` and every radius.
pub fn statistic_table(
    cfg: &WalkConfig,
    stat: Statistic,
    eps: &[f64],
    n_max: u32,
    prune: f64,
) -> Result<StatisticTable> {
    if eps.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::Invalid("radii must be positive".into()));
    }
    let proj = Projector::new(cfg);
    let mut order: Vec<usize> = (0..eps.len()).collect();
    order.sort_by(|&a, &b| eps[b].partial_cmp(&eps[a]).unwrap());
    let emax = eps.iter().cloned().fold(0.0, f64::max);
    let mut probs = vec![vec![0.0; n_max as usize + 1]; eps.len()];
    let mut lost = vec![0.0; n_max as usize + 1];
    let mut ev = Evolution::new(cfg, prune)?;
    let mut acc = vec![0.0; eps.len()];
    let zero = vec![0i64; proj.d()];
    for n in 0..=n_max {
        if n > 0 {
            ev.step()?;
        }
        let dist = ev.current();
        lost[n as usize] = dist.lost_mass();
        if stat != Statistic::Torus && n % 2 == 0 {
            continue;
        }
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut fail = None;
        dist.for_each_point(|q, pr| {
            if fail.is_some() {
                return;
            }
            let p = proj.project(q, if stat == Statistic::Torus { None } else { Some(&zero) });
            let s = p.norm_sq();
            if s > emax * emax * (1.0 + 1e-9) + p.norm_sq_err() {
                return;
            }
            if stat != Statistic::Ball && proj.support_mask(q, &p) == 0 {
                return;
            }
            for &e in &order {
                match proj.within(q, &p, eps[e]) {
                    Ok(true) => acc[e] += pr,
                    Ok(false) => break,
                    Err(err) => {
                        fail = Some(err);
                        return;
                    }
                }
            }
        });
        if let Some(e) = fail {
            return Err(e);
        }
        for e in 0..eps.len() {
            probs[e][n as usize] = acc[e];
        }
    }
    Ok(StatisticTable { probs, lost })
}

fn included(stat: Statistic, n: u32) -> bool {
    stat == Statistic::Torus || n % 2 == 1
}

/// Evaluates the requested series at every radius.
pub fn recurrence_series(cfg: &WalkConfig, req: &SeriesRequest) -> Result<Vec<TailedSum>> {
    if let SeriesWeights::Power { beta } = req.weights {
        if !(beta > 2.0) {
            return Err(Error::Invalid("beta must exceed 2".into()));
        }
    }
    if req.n_eps == 0 || req.n_max == 0 {
        return Err(Error::Invalid("nEps and nMax must be positive".into()));
    }
    if req.mode == TailMode::Asymptotic && req.statistic == Statistic::Torus {
        return Err(Error::Invalid(
            "the asymptotic tail is available for the real projection only".into(),
        ));
    }
    let table = statistic_table(cfg, req.statistic, &req.eps, req.n_max, req.prune)?;
    let crude = req.weights.crude_tail(req.n_max as u64);
    let mut out = Vec::with_capacity(req.eps.len());
    for (e, &eps) in req.eps.iter().enumerate() {
        let mut partial = 0.0;
        let mut lost_inflation = 0.0;
        let mut decade_max: f64 = 0.0;
        for n in req.n_eps..=req.n_max {
            if !included(req.statistic, n) {
                continue;
            }
            let w = req.weights.weight(n as u64);
            let p = table.probs[e][n as usize];
            partial += w * p;
            lost_inflation += w * table.lost[n as usize];
            if n > req.n_max / 10 {
                decade_max = decade_max.max(p + table.lost[n as usize]);
            }
        }
        let asymptotic_tail = if req.mode == TailMode::Asymptotic {
            let include_zero = req.statistic == Statistic::Ball;
            Some(asymptotic_tail(cfg, req.weights, eps, req.n_max, include_zero)?.tail)
        } else {
            None
        };
        out.push(TailedSum {
            partial,
            n_truncation: req.n_max,
            mode: req.mode,
            crude_tail: crude,
            envelope_tail: crude * decade_max.min(1.0),
            asymptotic_tail,
            lost_inflation,
        });
    }
    Ok(out)
}

fn single(
    cfg: &WalkConfig,
    weights: SeriesWeights,
    stat: Statistic,
    eps: f64,
    n_eps: u32,
    n_max: u32,
    mode: TailMode,
) -> Result<TailedSum> {
    let req = SeriesRequest {
        weights,
        statistic: stat,
        eps: vec![eps],
        n_eps,
        n_max,
        mode,
        prune: DEFAULT_PRUNE,
    };
    Ok(recurrence_series(cfg, &req)?.remove(0))
}

/// `J_beta(eps) = sum_{nEps <= n, n odd} n^{-beta/2} P(0 < |U_n| <= eps)`.
pub fn j_beta(cfg: &WalkConfig, beta: f64, eps: f64, n_eps: u32, n_max: u32, mode: TailMode) -> Result<TailedSum> {
    single(
        cfg,
        SeriesWeights::Power { beta },
        Statistic::Real,
        eps,
        n_eps,
        n_max,
        mode,
    )
}

/// `I_beta(eps) = sum_{nEps <= n} n^{-beta/2} P(0 < |U-bar_n| <= eps)`.
pub fn i_beta(cfg: &WalkConfig, beta: f64, eps: f64, n_eps: u32, n_max: u32, mode: TailMode) -> Result<TailedSum> {
    single(
        cfg,
        SeriesWeights::Power { beta },
        Statistic::Torus,
        eps,
        n_eps,
        n_max,
        mode,
    )
}
