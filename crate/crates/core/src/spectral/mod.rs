//! Spectral measure, indicator covariances, the ball window, the excursion
//! variance series and the structure factor.

mod arcsine;
mod fit;
mod sfactor;
mod variance;
mod window;

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::{Float, ToPrimitive, Zero};

use crate::real::{Frequencies, Surd};

pub use arcsine::{arcsine_coeff, gamma_u, hermite_he, level_coeff_hermite, level_coefficients};
pub use fit::{scaling_fit, ScalingFit};
pub use sfactor::{structure_factor_atoms, structure_factor_ball, structure_factor_ball_grid, Atom};
pub use variance::{
    level_coefficient_table, level_variance, variance_multi, variance_series, VariancePoint, VarianceReport,
    LEVEL_FIT_DEGREE, NORMALIZATION,
};
pub use window::{window_hat, WindowTransform};

/// A finite symmetric measure of atoms in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    pub d: usize,
    pub atoms: Vec<(Vec<f64>, f64)>,
    pub symmetric: bool,
    /// Axes whose extended tuple `(1, omega_[k])` has a rational relation.
    pub commensurate_axes: Vec<usize>,
}

impl SpectralMeasure {
    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// Atoms `+-e_k` and `+-omega_[k],i e_k`, each of weight `1 / (2 d (m+1))`.
pub fn make_mu(freqs: &Frequencies) -> SpectralMeasure {
    let (d, m1) = (freqs.d(), freqs.m() + 1);
    let w = 1.0 / (2 * d * m1) as f64;
    let bar = freqs.bar_f64();
    let mut atoms = Vec::with_capacity(2 * d * m1);
    for k in 0..d {
        for i in 0..m1 {
            for s in [1.0, -1.0] {
                let mut x = vec![0.0; d];
                x[k] = s * bar[k * m1 + i];
                atoms.push((x, w));
            }
        }
    }
    let commensurate_axes = (0..d)
        .filter(|&k| axis_relation(freqs, k, u64::MAX).is_some())
        .collect();
    SpectralMeasure {
        d,
        atoms,
        symmetric: true,
        commensurate_axes,
    }
}

/// `C(t) = sum_x w cos(t . x)`.
pub fn covariance(mu: &SpectralMeasure, t: &[f64]) -> f64 {
    mu.atoms
        .iter()
        .map(|(x, w)| w * x.iter().zip(t).map(|(a, b)| a * b).sum::<f64>().cos())
        .sum()
}

/// An integer relation `sum_j q_j omega-bar_j e_{axis(j)} = 0` among the atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZRelation {
    /// Lattice vector in axis-major coordinates.
    pub q: Vec<i64>,
}

/// Smallest relation (sup norm) on axis `k` among same-radicand pairs, if any
/// has coefficients bounded by `qmax`; for three or more commensurable entries
/// a bounded brute-force search also runs.
fn axis_relation(freqs: &Frequencies, k: usize, qmax: u64) -> Option<Vec<i64>> {
    let m1 = freqs.m() + 1;
    let vals: Vec<Surd> = (0..m1).map(|i| freqs.bar(k * m1 + i)).collect();
    let mut best: Option<Vec<i64>> = None;
    fn sup(q: &[i64]) -> u64 {
        q.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }
    let consider = |best: &mut Option<Vec<i64>>, cand: Vec<i64>| {
        let norm = sup(&cand);
        if norm == 0 || norm > qmax {
            return;
        }
        if best.as_ref().map_or(true, |b| norm < sup(b)) {
            *best = Some(cand);
        }
    };
    for a in 0..m1 {
        for b in a + 1..m1 {
            if vals[a].radicand != vals[b].radicand {
                continue;
            }
            // q_a c_a + q_b c_b = 0 with c = n/d: q_a = n_b d_a / g, q_b = -n_a d_b / g.
            let (ca, cb) = (&vals[a].coeff, &vals[b].coeff);
            let qa = cb.numer() * ca.denom();
            let qb = -(ca.numer() * cb.denom());
            let g = qa.gcd(&qb);
            let (qa, qb) = (&qa / &g, &qb / &g);
            if let (Some(qa), Some(qb)) = (qa.to_i64(), qb.to_i64()) {
                let mut q = vec![0i64; m1];
                q[a] = qa;
                q[b] = qb;
                consider(&mut best, q);
            }
        }
    }
    // Groups of three or more sharing a radicand can carry shorter relations.
    let mut groups: alloc::collections::BTreeMap<u64, Vec<usize>> = alloc::collections::BTreeMap::new();
    for (i, v) in vals.iter().enumerate() {
        groups.entry(v.radicand).or_default().push(i);
    }
    for idx in groups.values().filter(|g| g.len() >= 3) {
        let bound = best.as_ref().map_or(qmax, |b| sup(b) - 1);
        let side = 2 * bound.min(64) + 1;
        if (side as f64).powi(idx.len() as i32) > 2e6 {
            continue;
        }
        let r = bound.min(64) as i64;
        let mut q = vec![-r; idx.len()];
        loop {
            let mut s = BigRational::zero();
            for (c, &i) in q.iter().zip(idx) {
                s += &vals[i].coeff * BigRational::from_integer(BigInt::from(*c));
            }
            if s.is_zero() && q.iter().any(|&c| c != 0) {
                let mut full = vec![0i64; m1];
                for (c, &i) in q.iter().zip(idx) {
                    full[i] = *c;
                }
                consider(&mut best, full);
            }
            let mut j = 0;
            while j < q.len() {
                if q[j] < r {
                    q[j] += 1;
                    break;
                }
                q[j] = -r;
                j += 1;
            }
            if j == q.len() {
                break;
            }
        }
    }
    best
}

/// The first relation with sup norm `<= qmax`, if any.
pub fn zfree_relation(freqs: &Frequencies, qmax: u64) -> Option<ZRelation> {
    let (d, m1) = (freqs.d(), freqs.m() + 1);
    for k in 0..d {
        if let Some(r) = axis_relation(freqs, k, qmax) {
            let mut q = vec![0i64; d * m1];
            q[k * m1..(k + 1) * m1].copy_from_slice(&r);
            return Some(ZRelation { q });
        }
    }
    None
}

/// `true` when no integer relation with `|q|_inf <= qmax` exists among the atoms.
///
/// Atoms on different axes are orthogonal, so relations live within one axis;
/// there, square roots of distinct squarefree integers are independent over
/// `Q` and only entries sharing a radicand can be related.
pub fn zfree_check(freqs: &Frequencies, qmax: u64) -> bool {
    zfree_relation(freqs, qmax).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::DEFAULT_PRECISION;

    fn freqs(s: &str) -> Frequencies {
        Frequencies::parse(s, DEFAULT_PRECISION).unwrap()
    }

    #[test]
    fn measure_atoms() {
        let mu = make_mu(&freqs("sqrt:2"));
        assert_eq!(mu.atoms.len(), 4);
        assert!(mu.atoms.iter().all(|a| a.1 == 0.25));
        let mu2 = make_mu(&freqs("sqrt:2; sqrt:2"));
        assert_eq!(mu2.atoms.len(), 8);
        assert!((mu2.total_weight() - 1.0).abs() < 1e-15);
        let c = covariance(&mu, &[core::f64::consts::PI]);
        assert!((c + 0.633_13).abs() < 1e-5, "{c}");
        assert_eq!(covariance(&mu, &[0.0]), 1.0);
    }

    #[test]
    fn relations() {
        assert!(zfree_check(&freqs("sqrt:2"), 1_000_000));
        assert_eq!(zfree_relation(&freqs("dec:1.5"), 3).unwrap().q, vec![3, -2]);
        assert!(zfree_check(&freqs("dec:1.5"), 2));
        assert_eq!(zfree_relation(&freqs("sqrt:2 sqrt:8"), 2).unwrap().q, vec![0, 2, -1]);
        assert_eq!(make_mu(&freqs("dec:1.5")).commensurate_axes, vec![0]);
        // Three commensurable entries with a shorter joint relation.
        let r = zfree_relation(&freqs("dec:1.001 dec:0.001"), 5).unwrap();
        assert_eq!(r.q.iter().map(|x| x.abs()).max(), Some(1));
    }
}
