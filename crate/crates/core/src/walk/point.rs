//! `P(S_n = q)` without the full distribution.
//!
//! Conditioning on how many steps each axis receives, the coordinates are
//! independent one-dimensional simple walks. The composition sum is split into
//! nested binomials (axis `j` versus the remaining axes), and each binomial is
//! truncated to `rp +- (12 sigma + 40)`, whose Bernstein tail is below `e^{-60}`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::WalkConfig;
use crate::numeric::{binom_pmf, ln_binom_pmf};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// `P(X_N = x)` for the one-dimensional simple walk.
fn srw(nsteps: u64, x: i64) -> f64 {
    let a = x.unsigned_abs();
    if a > nsteps || (nsteps - a) % 2 == 1 {
        return 0.0;
    }
    if nsteps == 0 {
        return 1.0;
    }
    binom_pmf((nsteps + a) / 2, nsteps, 0.5)
}

fn window(r: u64, p: f64) -> (u64, u64) {
    if p >= 1.0 {
        return (r, r);
    }
    let rf = r as f64;
    let w = 12.0 * (rf * p * (1.0 - p)).sqrt() + 40.0;
    let lo = (rf * p - w).floor().max(0.0) as u64;
    let hi = ((rf * p + w).ceil() as u64).min(r);
    (lo, hi)
}

/// `P(S_n = q)`.
pub fn point_probability(cfg: &WalkConfig, n: u64, q: &[i64]) -> f64 {
    let m = cfg.dim();
    assert_eq!(q.len(), m, "lattice point has the wrong dimension");
    let l1: u64 = q.iter().map(|x| x.unsigned_abs()).sum();
    if l1 > n || (n - l1) % 2 == 1 {
        return 0.0;
    }
    let theta = cfg.weights();
    // Conditional split probabilities p_j = theta_j / sum_{i >= j} theta_i.
    let mut rest = vec![0.0; m + 1];
    for j in (0..m).rev() {
        rest[j] = rest[j + 1] + theta[j];
    }
    let split: Vec<f64> = (0..m).map(|j| (theta[j] / rest[j]).min(1.0)).collect();
    // tail_l1[j] = sum_{i >= j} |q_i|: steps that axes j.. need at least.
    let mut tail_l1 = vec![0u64; m + 1];
    for j in (0..m).rev() {
        tail_l1[j] = tail_l1[j + 1] + q[j].unsigned_abs();
    }
    // Forward pass: range of remaining step counts r reaching each level.
    let mut ranges: Vec<(u64, u64)> = vec![(n, n)];
    for j in 0..m - 1 {
        let (lo, hi) = ranges[j];
        let mut nlo = u64::MAX;
        let mut nhi = 0;
        for r in lo..=hi {
            let (a, b) = window(r, split[j]);
            nlo = nlo.min(r - b);
            nhi = nhi.max(r - a);
        }
        ranges.push((nlo.max(tail_l1[j + 1]), nhi));
    }
    // Backward pass: h_j(r) = sum_N Bin(N; r, p_j) P(X_N = q_j) h_{j+1}(r - N).
    let (lo, hi) = ranges[m - 1];
    let mut h: Vec<f64> = if lo > hi {
        Vec::new()
    } else {
        (lo..=hi).map(|r| srw(r, q[m - 1])).collect()
    };
    let mut h_lo = lo;
    for j in (0..m - 1).rev() {
        let (lo, hi) = ranges[j];
        let mut next = Vec::with_capacity((hi.saturating_sub(lo) + 1) as usize);
        for r in lo..=hi {
            let (a, b) = window(r, split[j]);
            let a = a.max(q[j].unsigned_abs());
            let mut s = 0.0;
            let mut nj = a;
            if (nj + q[j].unsigned_abs()) % 2 == 1 {
                nj += 1;
            }
            while nj <= b {
                let rem = r - nj;
                if rem >= h_lo && ((rem - h_lo) as usize) < h.len() {
                    let tail = h[(rem - h_lo) as usize];
                    if tail > 0.0 {
                        let lb = ln_binom_pmf(nj, r, split[j]);
                        s += (lb).exp() * srw(nj, q[j]) * tail;
                    }
                }
                nj += 2;
            }
            next.push(s);
        }
        h = next;
        h_lo = lo;
    }
    h.first().copied().unwrap_or(0.0)
}

/// Number of `n`-step paths of the uniform walk on `Z^M` ending at `q`.
pub fn path_count(dim: usize, n: u64, q: &[i64]) -> BigUint {
    assert_eq!(q.len(), dim);
    let l1: u64 = q.iter().map(|x| x.unsigned_abs()).sum();
    if l1 > n || (n - l1) % 2 == 1 {
        return BigUint::zero();
    }
    // Exponential generating function over axes: sum over compositions of
    // n! / prod N_j! * prod C(N_j, (N_j + q_j)/2).
    let fact: Vec<BigUint> = {
        let mut f = vec![BigUint::one(); n as usize + 1];
        for k in 1..=n as usize {
            f[k] = &f[k - 1] * BigUint::from(k);
        }
        f
    };
    let choose = |a: u64, b: u64| &fact[a as usize] / (&fact[b as usize] * &fact[(a - b) as usize]);
    // poly[r] = sum over compositions of r steps among processed axes of
    // prod C(N_j, .) / N_j!, kept with a common denominator via exact rationals.
    let mut poly: Vec<BigRational> = vec![BigRational::zero(); n as usize + 1];
    poly[0] = BigRational::one();
    for &x in q {
        let a = x.unsigned_abs();
        let mut next = vec![BigRational::zero(); n as usize + 1];
        for (r, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut nj = a;
            while r as u64 + nj <= n {
                let w = BigRational::new(
                    BigInt::from(choose(nj, (nj + a) / 2)),
                    BigInt::from(fact[nj as usize].clone()),
                );
                next[r + nj as usize] += c * w;
                nj += 2;
            }
        }
        poly = next;
    }
    let total = &poly[n as usize] * BigRational::from_integer(BigInt::from(fact[n as usize].clone()));
    debug_assert!(total.is_integer());
    total.to_integer().to_biguint().expect("counts are nonnegative")
}

/// `P(S_n = q)` for uniform weights as the exact fraction `count / (2M)^n`.
pub fn point_probability_exact(dim: usize, n: u64, q: &[i64]) -> BigRational {
    let den = num_traits::pow(BigInt::from(2 * dim), n as usize);
    BigRational::new(BigInt::from(path_count(dim, n, q)), den)
}
