//! Projection of lattice points to `R^d` and the torus, with rigorous
//! classification against balls.
//!
//! The `f64` projection carries a per-axis error bound. Decisions whose margin
//! falls inside that band are redone exactly on quadratic forms.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::{Float, FromPrimitive};

use super::{LatticeDistribution, WalkConfig};
use crate::real::{QuadraticForm, Surd};
use crate::{Error, Result};

const MAX_BITS: u32 = 1 << 14;

/// `[lo, hi]` with `hi - lo` the pruned-mass inflation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Projects `q in Z^M` to `U = q (x) omega-bar in R^d`.
#[derive(Clone, Debug)]
pub struct Projector {
    d: usize,
    m1: usize,
    bar: Vec<f64>,
    surds: Vec<Surd>,
    bits: u32,
}

/// A projected point relative to an integer shift, with error bounds.
#[derive(Clone, Debug)]
pub struct Projection {
    /// `U - x` per axis.
    pub y: Vec<f64>,
    /// Absolute error bound per axis.
    pub err: Vec<f64>,
    /// The integer shift `x` (nearest integers on the torus).
    pub shift: Vec<i64>,
}

impl Projection {
    pub fn norm_sq(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum()
    }

    /// Error bound on [`Projection::norm_sq`].
    pub fn norm_sq_err(&self) -> f64 {
        let s: f64 = self.y.iter().zip(&self.err).map(|(y, e)| (2.0 * y.abs() + e) * e).sum();
        s + 4.0 * f64::EPSILON * self.norm_sq() + f64::MIN_POSITIVE
    }
}

impl Projector {
    pub fn new(cfg: &WalkConfig) -> Self {
        let f = cfg.freqs();
        Projector {
            d: f.d(),
            m1: f.m() + 1,
            bar: f.bar_f64(),
            surds: (0..f.lattice_dim()).map(|j| f.bar(j)).collect(),
            bits: f.precision(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `U - x` in `f64`; `x = None` reduces to the torus (nearest integer).
    pub fn project(&self, q: &[i64], x: Option<&[i64]>) -> Projection {
        let mut y = vec![0.0; self.d];
        let mut err = vec![0.0; self.d];
        let mut shift = vec![0i64; self.d];
        for k in 0..self.d {
            let mut u = 0.0;
            let mut a = 0.0;
            for i in 0..self.m1 {
                let j = k * self.m1 + i;
                let t = q[j] as f64 * self.bar[j];
                u += t;
                a += t.abs();
            }
            let s = match x {
                Some(x) => x[k],
                None => u.round() as i64,
            };
            shift[k] = s;
            y[k] = u - s as f64;
            err[k] = 2.0 * (self.m1 as f64 + 2.0) * f64::EPSILON * (a + (s as f64).abs());
        }
        Projection { y, err, shift }
    }

    /// Exact `U_k - shift` as a quadratic form.
    pub fn axis_form(&self, q: &[i64], k: usize, shift: i64) -> QuadraticForm {
        let mut f = QuadraticForm::new();
        for i in 0..self.m1 {
            let j = k * self.m1 + i;
            f.add_surd(&self.surds[j], q[j]);
        }
        f.add_integer(-shift);
        f
    }

    /// Bitmask of axes where `U - shift` is nonzero, decided exactly.
    pub fn support_mask(&self, q: &[i64], p: &Projection) -> u32 {
        let mut mask = 0u32;
        for k in 0..self.d {
            if p.y[k].abs() > p.err[k] || !self.axis_form(q, k, p.shift[k]).is_zero() {
                mask |= 1 << k;
            }
        }
        mask
    }

    /// Closed-ball test `|U - shift| <= eps`.
    pub fn within(&self, q: &[i64], p: &Projection, eps: f64) -> Result<bool> {
        let s = p.norm_sq();
        let e2 = eps * eps;
        let band = p.norm_sq_err() + 2.0 * f64::EPSILON * e2;
        if s < e2 - band {
            return Ok(true);
        }
        if s > e2 + band {
            return Ok(false);
        }
        self.within_exact(q, &p.shift, eps)
    }

    /// Exact closed-ball test on quadratic forms.
    pub fn within_exact(&self, q: &[i64], shift: &[i64], eps: f64) -> Result<bool> {
        let e = BigRational::from_f64(eps).ok_or_else(|| Error::Invalid("radius is not finite".into()))?;
        let mut acc = QuadraticForm::new();
        for k in 0..self.d {
            let f = self.axis_form(q, k, shift[k]);
            acc.add_form(&f.mul(&f));
        }
        acc.add_rational(&-(&e * &e));
        Ok(acc.signum(self.bits, MAX_BITS.max(self.bits))? <= 0)
    }
}

fn mask_of(k: &[usize], d: usize) -> Result<u32> {
    let mut m = 0u32;
    for &a in k {
        if a >= d {
            return Err(Error::Invalid("axis index out of range".into()));
        }
        m |= 1 << a;
    }
    Ok(m)
}

fn ball_mass(
    cfg: &WalkConfig,
    dist: &LatticeDistribution,
    eps: f64,
    k: &[usize],
    x: Option<&[i64]>,
) -> Result<Interval> {
    let proj = Projector::new(cfg);
    let want = mask_of(k, proj.d())?;
    let mut s = 0.0;
    let mut err = None;
    dist.for_each_point(|q, pr| {
        if err.is_some() {
            return;
        }
        let p = proj.project(q, x);
        if p.norm_sq() > (eps + 1.0) * (eps + 1.0) {
            return;
        }
        match proj.within(q, &p, eps) {
            Ok(true) => {
                if proj.support_mask(q, &p) == want {
                    s += pr;
                }
            }
            Ok(false) => {}
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Interval {
        lo: s,
        hi: s + dist.lost_mass(),
    })
}

/// `P(U_n - x in B(0, eps), (U_n - x)_[k] != 0 exactly for k in K)`.
///
/// `k` lists zero-based axes; an empty `k` is the exact-hit probability
/// `P(U_n = x)` intersected with the ball.
pub fn p_n_k(cfg: &WalkConfig, dist: &LatticeDistribution, eps: f64, k: &[usize], x: &[i64]) -> Result<Interval> {
    if x.len() != cfg.freqs().d() {
        return Err(Error::Invalid("shift has the wrong dimension".into()));
    }
    ball_mass(cfg, dist, eps, k, Some(x))
}

/// Torus version: `P(U-bar_n in B_K(eps))`, distances taken to the nearest
/// integer point.
pub fn pbar_n_k(cfg: &WalkConfig, dist: &LatticeDistribution, eps: f64, k: &[usize]) -> Result<Interval> {
    ball_mass(cfg, dist, eps, k, None)
}
