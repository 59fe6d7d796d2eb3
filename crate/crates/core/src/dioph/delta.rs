use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::real::{dyadic_to_f64, Dyadic, QuadraticForm, Surd};
use crate::{Error, Result};

/// `delta_q(omega)` with the minimizing integer.
#[derive(Clone, Debug, PartialEq)]
pub struct Approximant {
    pub q: Vec<i64>,
    /// Nearest integer to `q . omega` (the smaller one on an exact tie).
    pub p: i64,
    pub delta: f64,
    /// True when `q . omega` is rational and `delta` is exactly rounded.
    pub exact: bool,
}

/// Evaluates `delta_q` repeatedly for one frequency vector.
///
/// Enclosures of every entry are computed once; `q . omega` is then an exact
/// integer combination of them.
#[derive(Clone, Debug)]
pub struct DeltaEngine {
    omega: Vec<Surd>,
    enc: Vec<Dyadic>,
    bits: u32,
    /// Entries sharing an irrational radicand, when some radicand repeats.
    shared: bool,
}

impl DeltaEngine {
    pub fn new(omega: &[Surd], bits: u32) -> Self {
        let enc = omega.iter().map(|s| s.enclose(bits)).collect();
        let mut rads: Vec<u64> = omega.iter().filter(|s| !s.is_rational()).map(|s| s.radicand).collect();
        let n = rads.len();
        rads.sort_unstable();
        rads.dedup();
        DeltaEngine {
            omega: omega.to_vec(),
            enc,
            bits,
            shared: rads.len() != n,
        }
    }

    pub fn m(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[Surd] {
        &self.omega
    }

    fn rational_value(&self, q: &[i64]) -> Option<BigRational> {
        if !self.shared {
            let irrational_used = self.omega.iter().zip(q).any(|(s, &k)| k != 0 && !s.is_rational());
            if irrational_used {
                return None;
            }
        }
        let mut f = QuadraticForm::new();
        for (s, &k) in self.omega.iter().zip(q) {
            f.add_surd(s, k);
        }
        f.as_rational()
    }

    pub fn delta(&self, q: &[i64]) -> Result<Approximant> {
        if q.len() != self.m() {
            return Err(Error::Invalid(format!(
                "q has length {}, expected {}",
                q.len(),
                self.m()
            )));
        }
        if let Some(v) = self.rational_value(q) {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            let fl = v.floor();
            // Ties go to the smaller integer.
            let p = if &v - &fl <= half { fl } else { fl + BigRational::one() };
            let d = (&v - &p).abs();
            let p = p
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::Overflow(format!("nearest integer to q.omega for q = {q:?}")))?;
            return Ok(Approximant {
                q: q.to_vec(),
                p,
                delta: d.to_f64().unwrap_or(f64::NAN),
                exact: true,
            });
        }
        let mut x = Dyadic {
            lo: BigInt::zero(),
            hi: BigInt::zero(),
            bits: self.bits,
        };
        for (e, &k) in self.enc.iter().zip(q) {
            if k != 0 {
                x = x.add(&e.scale(k));
            }
        }
        let p = x.round_nearest().ok_or_else(|| {
            Error::PrecisionExhausted(format!(
                "q.omega for q = {q:?} is too close to a half-integer at {} bits",
                self.bits
            ))
        })?;
        let shifted = x.add_integer(-p.to_i64().ok_or_else(|| Error::Overflow(format!("p for q = {q:?}")))?);
        let (lo, hi) = (shifted.lo.abs(), shifted.hi.abs());
        let mid = (&lo + &hi) >> 1usize;
        let delta = dyadic_to_f64(&mid, self.bits);
        Ok(Approximant {
            q: q.to_vec(),
            p: p.to_i64().unwrap(),
            delta,
            exact: false,
        })
    }
}

/// `delta_q(omega) = min_p |p - q . omega|` at the given precision.
pub fn delta_q(omega: &[Surd], q: &[i64], bits: u32) -> Result<Approximant> {
    if q.iter().all(|&k| k == 0) {
        return Err(Error::Invalid("q must be nonzero".into()));
    }
    DeltaEngine::new(omega, bits).delta(q)
}

/// Nonzero `q` in `Z^m` with `|q| <= radius`, one per `{q, -q}` pair (first
/// nonzero coordinate positive), sorted by Euclidean norm then lexicographically.
pub fn half_lattice_ball(m: usize, radius: u64) -> Vec<Vec<i64>> {
    let r = radius as i64;
    let r2 = (radius as i128) * (radius as i128);
    let mut out: Vec<(i128, Vec<i64>)> = Vec::new();
    if m == 0 {
        return Vec::new();
    }
    let mut q = vec![-r; m];
    loop {
        let n2: i128 = q.iter().map(|&x| (x as i128) * (x as i128)).sum();
        if n2 > 0 && n2 <= r2 {
            if let Some(first) = q.iter().find(|&&x| x != 0) {
                if *first > 0 {
                    out.push((n2, q.clone()));
                }
            }
        }
        let mut i = m;
        loop {
            if i == 0 {
                out.sort();
                return out.into_iter().map(|(_, v)| v).collect();
            }
            i -= 1;
            if q[i] < r {
                q[i] += 1;
                break;
            }
            q[i] = -r;
        }
    }
}

/// Result of the pigeonhole search.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletResult {
    pub best: Approximant,
    /// `N^{-m}`: the pigeonhole guarantee for `0 < |q|_inf <= N`.
    pub bound: f64,
    /// `m^{m/2}`, so that `delta <= c_m |q|^{-m}` in the Euclidean norm.
    pub c_m: f64,
}

/// The `q` with `0 < |q|_inf <= N` minimizing `delta_q`; ties go to the
/// smaller sup-norm shell, then to the first in lexicographic order.
pub fn dirichlet_best(omega: &[Surd], n: u64, bits: u32) -> Result<DirichletResult> {
    let m = omega.len();
    if n == 0 || m == 0 {
        return Err(Error::Invalid("need N >= 1 and m >= 1".into()));
    }
    let engine = DeltaEngine::new(omega, bits);
    let mut best: Option<(u64, Approximant)> = None;
    for q in half_box(m, n) {
        let shell = q.iter().map(|x| x.unsigned_abs()).max().unwrap();
        let a = engine.delta(&q)?;
        let better = match &best {
            None => true,
            Some((s, b)) => a.delta < b.delta || (a.delta == b.delta && shell < *s),
        };
        if better {
            best = Some((shell, a));
        }
    }
    Ok(DirichletResult {
        best: best.unwrap().1,
        bound: (n as f64).powi(-(m as i32)),
        c_m: (m as f64).powf(m as f64 / 2.0),
    })
}

fn half_box(m: usize, n: u64) -> Vec<Vec<i64>> {
    let r = n as i64;
    let mut out = Vec::new();
    let mut q = vec![-r; m];
    loop {
        if let Some(first) = q.iter().find(|&&x| x != 0) {
            if *first > 0 {
                out.push(q.clone());
            }
        }
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if q[i] < r {
                q[i] += 1;
                break;
            }
            q[i] = -r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Descriptor;

    fn sv(s: &[&str]) -> Vec<Surd> {
        s.iter().map(|d| Descriptor::parse(d).unwrap().value()).collect()
    }

    #[test]
    fn delta_examples() {
        let a = delta_q(&sv(&["sqrt:2"]), &[2], 256).unwrap();
        assert_eq!(a.p, 3);
        assert!((a.delta - (3.0 - 2.0 * core::f64::consts::SQRT_2)).abs() < 1e-15);
        let b = delta_q(&sv(&["sqrt:2", "sqrt:3"]), &[1, 1], 256).unwrap();
        assert_eq!(b.p, 3);
        assert!((b.delta - 0.146_264).abs() < 1e-6);
        let c = delta_q(&sv(&["dec:0.25"]), &[4], 256).unwrap();
        assert!(c.exact && c.delta == 0.0 && c.p == 1);
        // Exact half: the smaller integer wins.
        let t = delta_q(&sv(&["dec:0.5"]), &[1], 256).unwrap();
        assert_eq!((t.p, t.delta), (0, 0.5));
        // Shared radicand cancels exactly.
        let z = delta_q(&sv(&["sqrt:2", "sqrt:8"]), &[2, -1], 256).unwrap();
        assert!(z.exact && z.delta == 0.0);
    }

    #[test]
    fn half_ball_is_sorted_and_canonical() {
        let b = half_lattice_ball(2, 2);
        assert_eq!(b.len(), 6);
        assert_eq!(b[0], vec![0, 1]);
        assert_eq!(b[1], vec![1, 0]);
        assert_eq!(half_lattice_ball(1, 3), vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn dirichlet_examples() {
        let r = dirichlet_best(&sv(&["sqrt:2"]), 12, 256).unwrap();
        assert_eq!(r.best.q, vec![12]);
        assert!((r.best.delta - 0.029_437).abs() < 1e-6);
        let r = dirichlet_best(&sv(&["dec:0.333333333333333333333"]), 3, 256).unwrap();
        assert_eq!(r.best.q, vec![3]);
        let r = dirichlet_best(&sv(&["cf:0,3"]), 3, 256).unwrap();
        assert_eq!(r.best.delta, 0.0);
    }
}
