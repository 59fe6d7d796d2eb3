//! Fourier transform of the unit-ball indicator, `gamma-hat(x) = int_{B} e^{i x.t} dt`.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::numeric::{bessel_j1, unit_ball_volume, PI};
use crate::{Error, Result};

/// Largest supported argument.
pub const MAX_ARG: f64 = 1e4;

/// `gamma-hat^d(r)` at `|x| = r`, for `d` in `1..=3`.
pub fn window_hat(d: usize, r: f64) -> f64 {
    let r = r.abs().min(MAX_ARG);
    match d {
        1 => {
            if r < 1e-4 {
                2.0 * (1.0 - r * r / 6.0)
            } else {
                2.0 * r.sin() / r
            }
        }
        2 => {
            if r < 1e-4 {
                PI * (1.0 - r * r / 8.0)
            } else {
                2.0 * PI * bessel_j1(r) / r
            }
        }
        3 => {
            if r < 0.1 {
                // 4 pi (sin r - r cos r) / r^3 = 4 pi sum_k (-1)^k r^{2k} (2k+2) / (2k+3)!
                let r2 = r * r;
                let mut term = 1.0 / 3.0;
                let mut sum = term;
                let mut k = 0.0;
                for _ in 0..8 {
                    k += 1.0;
                    term *= -r2 / (2.0 * k * (2.0 * k + 3.0));
                    sum += term;
                }
                4.0 * PI * sum
            } else {
                4.0 * PI * (r.sin() - r * r.cos()) / (r * r * r)
            }
        }
        _ => f64::NAN,
    }
}

/// Properties of the ball window in dimension `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowTransform {
    pub d: usize,
    /// `gamma-hat(0)`, the unit-ball volume.
    pub kappa: f64,
    /// `r` with `gamma-hat >= c1 > 0` on `B(0, 4r)`.
    pub radius_of_positivity: f64,
    pub c1: f64,
    /// First positive zero of `gamma-hat`.
    pub first_zero: f64,
    /// `sup |gamma-hat(r)| r^{(d+1)/2}` over `[1, 10^3]`.
    pub c3: f64,
}

impl WindowTransform {
    pub fn ball(d: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Invalid("the ball window is implemented for d in 1..=3".into()));
        }
        let f = |r: f64| window_hat(d, r);
        let r = 0.5;
        // gamma-hat decreases from kappa to its first zero, so the minimum on
        // [0, 4r] is at 4r; the scan guards that claim.
        let mut c1 = f64::INFINITY;
        for i in 0..=400 {
            c1 = c1.min(f(4.0 * r * i as f64 / 400.0));
        }
        let mut lo = 0.0;
        let step = 0.01;
        while f(lo + step) > 0.0 {
            lo += step;
        }
        let mut hi = lo + step;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e = (d as f64 + 1.0) / 2.0;
        let mut c3: f64 = 0.0;
        let mut x = 1.0;
        while x <= 1e3 {
            c3 = c3.max(f(x).abs() * x.powf(e));
            x += 0.01;
        }
        Ok(WindowTransform {
            d,
            kappa: unit_ball_volume(d),
            radius_of_positivity: r,
            c1,
            first_zero: 0.5 * (lo + hi),
            c3,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert!((window_hat(1, 0.0) - 2.0).abs() < 1e-15);
        assert!((window_hat(3, 0.0) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((window_hat(2, 1.0) - 2.0 * PI * 0.440_050_585_744_933_5).abs() < 1e-12);
        for d in 1..=3 {
            assert!((window_hat(d, 0.0) - unit_ball_volume(d)).abs() < 1e-14);
        }
    }

    #[test]
    fn small_argument_branch_is_continuous() {
        for r in [0.0999, 0.1, 0.1001, 0.05, 0.01] {
            let series = window_hat(3, r);
            let closed = 4.0 * PI * (r.sin() - r * r.cos()) / (r * r * r);
            assert!((series - closed).abs() < 1e-9, "r={r}: {series} vs {closed}");
        }
    }

    #[test]
    fn planar_transform_matches_quadrature() {
        // int_B e^{i r t_1} dt = int_{-1}^{1} 2 sqrt(1 - s^2) cos(r s) ds, with s = sin(p).
        for r in [0.5, 1.0, 3.0, 7.0] {
            let (q, _) = crate::numeric::integrate(
                |p: f64| 2.0 * p.cos().powi(2) * (r * p.sin()).cos(),
                -PI / 2.0,
                PI / 2.0,
                1e-14,
                1e-12,
            );
            assert!((q - window_hat(2, r)).abs() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn transform_properties() {
        let zeros = [PI, 3.831_705_970_2, 4.493_409_457_9];
        for d in 1..=3 {
            let w = WindowTransform::ball(d).unwrap();
            assert!(w.c1 > 0.0);
            assert!((w.first_zero - zeros[d - 1]).abs() < 1e-8, "d={d}: {}", w.first_zero);
            assert!(w.c3.is_finite() && w.c3 > 0.0);
        }
    }
}
