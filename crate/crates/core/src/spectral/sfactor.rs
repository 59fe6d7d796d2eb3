//! The structure factor `S = sum_{n odd} a_n mu^{*n}`, `a_n = alpha_n / (2 pi)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::walk::{
    recurrence_series, Evolution, Projector, SeriesRequest, SeriesWeights, Statistic, TailMode, TailedSum, WalkConfig,
};
use crate::{Error, Result};

use super::arcsine::arcsine_coeff;

/// `S(B(0, eps))` for each radius: `sum_{n odd} a_n P(|U_n| <= eps)`.
pub fn structure_factor_ball_grid(
    cfg: &WalkConfig,
    eps: &[f64],
    n_max: u32,
    mode: TailMode,
    prune: f64,
) -> Result<Vec<TailedSum>> {
    let req = SeriesRequest {
        weights: SeriesWeights::Arcsine,
        statistic: Statistic::Ball,
        eps: eps.to_vec(),
        n_eps: 1,
        n_max,
        mode,
        prune,
    };
    recurrence_series(cfg, &req)
}

/// `S(B(0, eps))` truncated at `nMax`.
pub fn structure_factor_ball(cfg: &WalkConfig, eps: f64, n_max: u32, mode: TailMode) -> Result<TailedSum> {
    Ok(structure_factor_ball_grid(cfg, &[eps], n_max, mode, crate::walk::DEFAULT_PRUNE)?.remove(0))
}

/// An atom of the truncated structure factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

/// Atoms of `sum_{n odd <= nMax} a_n mu^{*n}` inside the box `window`
/// (`(lo, hi)` per axis), sorted by location.
///
/// Lattice points with exactly equal projections are merged.
pub fn structure_factor_atoms(cfg: &WalkConfig, n_max: u32, window: &[(f64, f64)]) -> Result<Vec<Atom>> {
    let d = cfg.freqs().d();
    if window.len() != d {
        return Err(Error::Invalid("window needs one interval per axis".into()));
    }
    let proj = Projector::new(cfg);
    let zero = vec![0i64; d];
    let mut by_point: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    let mut ev = Evolution::new(cfg, 0.0)?;
    let pi2 = 2.0 * crate::numeric::PI;
    for n in 1..=n_max {
        ev.step()?;
        if n % 2 == 0 {
            continue;
        }
        let a = arcsine_coeff(n as u64) / pi2;
        ev.current().for_each_point(|q, p| {
            let pr = proj.project(q, Some(&zero));
            let inside =
                pr.y.iter()
                    .zip(&pr.err)
                    .zip(window)
                    .all(|((&y, &e), &(lo, hi))| y + e >= lo && y - e <= hi);
            if inside {
                *by_point.entry(q.to_vec()).or_insert(0.0) += a * p;
            }
        });
    }
    let mut items: Vec<(Vec<f64>, f64, Vec<i64>, f64)> = by_point
        .into_iter()
        .map(|(q, w)| {
            let p = proj.project(&q, Some(&zero));
            let e = p.err.iter().cloned().fold(0.0, f64::max);
            (p.y, e, q, w)
        })
        .collect();
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.2.cmp(&b.2)));
    let mut out: Vec<Atom> = Vec::new();
    let mut last_q: Option<Vec<i64>> = None;
    let mut last_err = 0.0;
    for (loc, err, q, w) in items {
        if let (Some(prev_q), Some(prev)) = (&last_q, out.last_mut()) {
            let close = prev
                .location
                .iter()
                .zip(&loc)
                .all(|(a, b)| (a - b).abs() <= err + last_err);
            if close && (0..d).all(|k| proj.axis_form(prev_q, k, 0) == proj.axis_form(&q, k, 0)) {
                prev.weight += w;
                continue;
            }
        }
        last_q = Some(q);
        last_err = err;
        out.push(Atom {
            location: loc,
            weight: w,
        });
    }
    Ok(out)
}
