use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::delta::{half_lattice_ball, DeltaEngine};
use super::psi::RegularPsi;
use crate::{Error, Result};

/// One element of `I_eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxElement {
    pub q: Vec<i64>,
    pub p: i64,
    pub delta: f64,
}

impl ApproxElement {
    pub fn norm(&self) -> f64 {
        norm(&self.q)
    }
}

fn norm(q: &[i64]) -> f64 {
    q.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt()
}

/// Pairwise separation of an approximation set.
#[derive(Clone, Debug, PartialEq)]
pub struct Separation {
    /// `psi^{-1}(eps)`.
    pub rho: u64,
    /// Smallest `|q - q'|` or `|q + q'|` over distinct listed pairs (infinite for < 2 elements).
    pub min_gap: f64,
    pub holds: bool,
}

/// `I_eps(omega) = { q : 0 < delta_q <= eps, |q| <= Qmax }`, listed up to sign.
///
/// `I_eps` is symmetric under `q -> -q`; only the representative whose first
/// nonzero coordinate is positive is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxSet {
    pub epsilon: f64,
    pub elements: Vec<ApproxElement>,
    pub search_radius: u64,
    /// Set when `Qmax < psi^{-1}(eps)`, so the list cannot reach the first element.
    pub incomplete: bool,
    pub separation: Option<Separation>,
}

impl ApproxSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

pub fn i_eps_set(engine: &DeltaEngine, eps: f64, qmax: u64, psi: Option<&RegularPsi>) -> Result<ApproxSet> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Invalid("eps must lie in (0, 1/2)".into()));
    }
    let mut elements = Vec::new();
    for q in half_lattice_ball(engine.m(), qmax) {
        let a = engine.delta(&q)?;
        if a.delta > 0.0 && a.delta <= eps {
            elements.push(ApproxElement {
                q,
                p: a.p,
                delta: a.delta,
            });
        }
    }
    let (incomplete, separation) = match psi {
        None => (false, None),
        Some(psi) => {
            let rho = psi.inverse(eps)?;
            let min_gap = min_gap(&elements);
            (
                qmax < rho,
                Some(Separation {
                    rho,
                    min_gap,
                    holds: min_gap >= rho as f64,
                }),
            )
        }
    };
    Ok(ApproxSet {
        epsilon: eps,
        elements,
        search_radius: qmax,
        incomplete,
        separation,
    })
}

fn min_gap(el: &[ApproxElement]) -> f64 {
    let mut best = f64::INFINITY;
    if el.first().map(|e| e.q.len()) == Some(1) {
        // On the line the closest pair of representatives is adjacent, and
        // |q + q'| >= 2 min |q|.
        for w in el.windows(2) {
            best = best.min((w[1].q[0] - w[0].q[0]).unsigned_abs() as f64);
        }
        if let Some(e) = el.first() {
            best = best.min(2.0 * e.q[0].unsigned_abs() as f64);
        }
        return best;
    }
    for (i, a) in el.iter().enumerate() {
        best = best.min(2.0 * a.norm());
        for b in &el[i + 1..] {
            let minus: Vec<i64> = a.q.iter().zip(&b.q).map(|(x, y)| x - y).collect();
            let plus: Vec<i64> = a.q.iter().zip(&b.q).map(|(x, y)| x + y).collect();
            best = best.min(norm(&minus)).min(norm(&plus));
        }
    }
    best
}

/// `min_N |q^(N)| / (N^{1/m} rho)` over the set, counting both signs so the
/// `j`-th representative is the `2j`-th element of the full set.
pub fn growth_constant(set: &ApproxSet, rho: u64) -> f64 {
    let m = set.elements.first().map(|e| e.q.len()).unwrap_or(1) as f64;
    set.elements
        .iter()
        .enumerate()
        .map(|(j, e)| e.norm() / ((2 * (j + 1)) as f64).powf(1.0 / m) / rho as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Finite-range certificate for `delta_q >= 2 psi(|q|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaCertificate {
    pub holds: bool,
    pub worst_ratio: f64,
    pub worst_q: Vec<i64>,
    pub q0: u64,
    pub qmax: u64,
    pub scanned: usize,
    pub empty_range: bool,
}

pub fn ba_certificate(engine: &DeltaEngine, psi: &RegularPsi, qmax: u64) -> Result<BaCertificate> {
    if qmax < 2 {
        return Err(Error::Invalid("Qmax must be at least 2".into()));
    }
    let q0 = psi.q0();
    let mut worst = (f64::INFINITY, Vec::new());
    let mut scanned = 0;
    for q in half_lattice_ball(engine.m(), qmax) {
        let r = norm(&q);
        if r < q0 as f64 {
            continue;
        }
        scanned += 1;
        let a = engine.delta(&q)?;
        let ratio = a.delta / (2.0 * psi.eval(r));
        if ratio < worst.0 {
            worst = (ratio, q);
        }
    }
    Ok(BaCertificate {
        holds: worst.0 >= 1.0,
        worst_ratio: worst.0,
        worst_q: worst.1,
        q0,
        qmax,
        scanned,
        empty_range: scanned == 0,
    })
}
