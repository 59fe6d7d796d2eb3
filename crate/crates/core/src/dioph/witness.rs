use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::{Float, Signed};

use super::cf::cf_convergents_upto;
use super::delta::{half_lattice_ball, DeltaEngine};
use super::psi::RegularPsi;
use crate::real::{liouville_sum, Descriptor};
use crate::{Error, Result};

/// An approximation `p_[k] - omega_[k] . q_[k]`, one row per axis.
///
/// The lattice point it describes has axis blocks `(-p_[k], q_[k])`, so its
/// coordinate-sum parity is that of `sum_k (p_[k] + sum_i q_[k],i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub p: Vec<i64>,
    pub q: Vec<Vec<i64>>,
    pub err: Vec<f64>,
    pub parity: u8,
}

impl Witness {
    pub fn scalar(p: i64, q: Vec<i64>, err: f64) -> Self {
        let parity = parity_of(p, &q);
        Witness {
            p: vec![p],
            q: vec![q],
            err: vec![err],
            parity,
        }
    }

    fn recompute_parity(&mut self) {
        let s: i64 = self.p.iter().sum::<i64>() + self.q.iter().flatten().sum::<i64>();
        self.parity = s.rem_euclid(2) as u8;
    }
}

fn parity_of(p: i64, q: &[i64]) -> u8 {
    (p + q.iter().sum::<i64>()).rem_euclid(2) as u8
}

/// Witness search outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct WaReport {
    pub witnesses: Vec<Witness>,
    /// Zero-based index `i*`: the witnesses certify `omega - e_{i*}` rather than `omega`.
    pub shift: Option<usize>,
    /// Whether the 2-adic reduction was applied.
    pub reduced: bool,
    pub qmax: u64,
}

/// Up to `count` witnesses `|p - omega . q| <= c_W psi(|q|)`, odd parity first.
///
/// For `m = 1` only continued-fraction convergents are scanned; for `m >= 2`
/// every `|q| <= Qmax` shell. If no odd witness exists, the witnesses are
/// divided by their largest common power of two; if parity stays even, an odd
/// coordinate `q_{i*}` is used to move to `omega - e_{i*}` with `p' = p - q_{i*}`.
pub fn wa_witnesses(engine: &DeltaEngine, psi: &RegularPsi, c_w: f64, count: usize, qmax: u64) -> Result<WaReport> {
    if count == 0 || !(c_w > 0.0) {
        return Err(Error::Invalid("need count >= 1 and c_W > 0".into()));
    }
    let m = engine.m();
    let mut found = Vec::new();
    let candidates: Vec<Vec<i64>> = if m == 1 {
        let x = &engine.omega()[0];
        let bits = (256 + 8 * (64 - qmax.leading_zeros())).max(256);
        let mut qs: Vec<Vec<i64>> = cf_convergents_upto(x, qmax, bits)?
            .into_iter()
            .map(|(_, q)| vec![q])
            .collect();
        qs.retain(|q| q[0] >= 1 && q[0] as u64 <= qmax);
        qs.dedup();
        qs
    } else {
        half_lattice_ball(m, qmax)
    };
    for q in candidates {
        let a = engine.delta(&q)?;
        let r = q.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
        if a.delta <= c_w * psi.eval(r) {
            found.push(Witness::scalar(a.p, q, a.delta));
        }
    }
    let (odd, even): (Vec<Witness>, Vec<Witness>) = found.into_iter().partition(|w| w.parity == 1);
    if !odd.is_empty() || even.is_empty() {
        let mut w = odd;
        w.extend(even);
        w.truncate(count);
        return Ok(WaReport {
            witnesses: w,
            shift: None,
            reduced: false,
            qmax,
        });
    }
    // Only even witnesses: 2-adic reduction.
    let reduced: Vec<Witness> = even.iter().map(reduce_2adic).collect();
    let odd_after: Vec<Witness> = reduced.iter().filter(|w| w.parity == 1).cloned().collect();
    if !odd_after.is_empty() {
        let mut w = odd_after;
        w.truncate(count);
        return Ok(WaReport {
            witnesses: w,
            shift: None,
            reduced: true,
            qmax,
        });
    }
    // Pick the index that is odd in the most reduced witnesses (smallest on ties).
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for w in &reduced {
        if let Some(i) = w.q[0].iter().position(|x| x.rem_euclid(2) == 1) {
            *votes.entry(i).or_default() += 1;
        }
    }
    let best = votes
        .iter()
        .map(|(&i, &v)| (v, core::cmp::Reverse(i)))
        .max()
        .map(|(_, r)| r.0);
    let i_star = best.ok_or_else(|| Error::Invalid("reduced witnesses have no odd coordinate".into()))?;
    let mut w: Vec<Witness> = reduced
        .into_iter()
        .filter(|w| w.q[0][i_star].rem_euclid(2) == 1)
        .map(|mut w| {
            w.p[0] -= w.q[0][i_star];
            w.recompute_parity();
            w
        })
        .collect();
    w.truncate(count);
    Ok(WaReport {
        witnesses: w,
        shift: Some(i_star),
        reduced: true,
        qmax,
    })
}

fn reduce_2adic(w: &Witness) -> Witness {
    let mut g = w.p[0].unsigned_abs();
    for &x in &w.q[0] {
        g = g.gcd(&x.unsigned_abs());
    }
    let k = if g == 0 { 0 } else { g.trailing_zeros() };
    let f = 1i64 << k;
    let q: Vec<i64> = w.q[0].iter().map(|x| x / f).collect();
    Witness::scalar(w.p[0] / f, q, w.err[0] / f as f64)
}

/// Spreads an odd scalar witness over `d` axes, keeping odd total parity.
///
/// For even `d` the first axis uses `(2p, 2q)`, so its error doubles.
pub fn swa_star_tensorize(w: &Witness, d: usize) -> Result<Witness> {
    if w.p.len() != 1 || w.q.len() != 1 {
        return Err(Error::Invalid("expected a scalar witness".into()));
    }
    if parity_of(w.p[0], &w.q[0]) != 1 {
        return Err(Error::Invalid("witness must have odd parity".into()));
    }
    if d == 0 {
        return Err(Error::Invalid("d must be positive".into()));
    }
    let mut out = Witness {
        p: vec![w.p[0]; d],
        q: vec![w.q[0].clone(); d],
        err: vec![w.err[0]; d],
        parity: 1,
    };
    if d % 2 == 0 {
        out.p[0] = w.p[0]
            .checked_mul(2)
            .ok_or_else(|| Error::Overflow("2p in tensorization".into()))?;
        out.q[0] = w.q[0].iter().map(|x| 2 * x).collect();
        out.err[0] = 2.0 * w.err[0];
    }
    out.recompute_parity();
    debug_assert_eq!(out.parity, 1);
    Ok(out)
}

/// `sum_{k <= depth} base^{-k!}` as an exact descriptor.
pub fn liouville_number(base: u32, depth: u32) -> Result<Descriptor> {
    Descriptor::parse(&format!("liouville:{base}:{depth}"))
}

/// Checks `delta_{base^{k!}} <= 2 base^{k! - (k+1)!}` exactly, for `1 <= k < depth`.
///
/// Returns the exact `delta` as a rational.
pub fn liouville_guarantee(base: u32, depth: u32, k: u32) -> Result<(BigRational, bool)> {
    if k == 0 || k >= depth {
        return Err(Error::Invalid("need 1 <= k < depth".into()));
    }
    let l = liouville_sum(base, depth);
    let fact = |n: u32| (1..=n as usize).product::<usize>();
    let q = num_traits::pow(BigInt::from(base), fact(k));
    let x = l * BigRational::from_integer(q);
    let fl = x.floor();
    let frac = &x - &fl;
    let half = BigRational::new(1.into(), 2.into());
    let delta = if frac <= half {
        frac
    } else {
        BigRational::from_integer(1.into()) - frac
    };
    let bound = BigRational::new(2.into(), num_traits::pow(BigInt::from(base), fact(k + 1) - fact(k)));
    let ok = delta.abs() <= bound;
    Ok((delta, ok))
}
