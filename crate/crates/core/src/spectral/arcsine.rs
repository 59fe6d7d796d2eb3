//! Indicator covariances of a Gaussian pair and their power-series coefficients.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::numeric::{integrate, normal_pdf, normal_sf, PI};

/// `alpha_n`: Taylor coefficients of `arcsin`, `C(2k,k) / (4^k (2k+1))` at
/// `n = 2k+1`, zero at even `n`.
pub fn arcsine_coeff(n: u64) -> f64 {
    if n % 2 == 0 {
        return 0.0;
    }
    let k = (n - 1) / 2;
    if k > 4096 {
        let kf = k as f64;
        let ln = libm::lgamma(2.0 * kf + 1.0) - 2.0 * libm::lgamma(kf + 1.0) - kf * 4f64.ln();
        return ln.exp() / (2.0 * kf + 1.0);
    }
    // prod_{i<=k} (2i-1)/(2i) = C(2k,k)/4^k.
    let mut c = 1.0;
    for i in 1..=k {
        c *= (2 * i - 1) as f64 / (2 * i) as f64;
    }
    c / (2 * k + 1) as f64
}

/// `Cov(1{X > u}, 1{Y > u})` for standard Gaussians with correlation `rho`:
/// `(1/2pi) int_0^{asin rho} exp(-u^2 / (1 + sin t)) dt`.
pub fn gamma_u(rho: f64, u: f64) -> f64 {
    let rho = rho.clamp(-1.0, 1.0);
    if rho == 1.0 {
        let p = normal_sf(u);
        return p * (1.0 - p);
    }
    if rho == -1.0 {
        // Y = -X: P(u < X < -u) - P(X > u)^2.
        let p = normal_sf(u);
        let both = if u < 0.0 {
            (1.0 - 2.0 * normal_sf(-u)).max(0.0)
        } else {
            0.0
        };
        return both - p * p;
    }
    let top = rho.asin();
    if u == 0.0 {
        return top / (2.0 * PI);
    }
    let u2 = u * u;
    let f = |t: f64| {
        let s = 1.0 + t.sin();
        if s <= 0.0 {
            0.0
        } else {
            (-u2 / s).exp()
        }
    };
    let (v, _) = integrate(f, 0.0, top, 1e-16, 1e-13);
    v / (2.0 * PI)
}

/// Probabilists' Hermite polynomial `He_k(x)`.
pub fn hermite_he(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if k == 0 {
        return a;
    }
    for j in 1..k {
        let c = x * b - j as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// Closed-form coefficients `(phi(u) He_{k-1}(u))^2 / k!` of `Gamma_u(rho) = sum_k alpha_{k,u} rho^k`.
pub fn level_coeff_hermite(k: usize, u: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let h = normal_pdf(u) * hermite_he(k - 1, u);
    let ln_fact = libm::lgamma(k as f64 + 1.0);
    h * h * (-ln_fact).exp()
}

/// Half-width of the fitting interval in `rho`.
const FIT_HALF_WIDTH: f64 = 0.3;

/// `alpha_{k,u}` for `k = 0..=degree` from a least-squares polynomial fit of
/// [`gamma_u`] on `[-0.3, 0.3]`.
pub fn level_coefficients(u: f64, degree: usize) -> Vec<f64> {
    let npts = 8 * (degree + 1) + 1;
    let ncol = degree + 1;
    // Rows of the scaled Vandermonde matrix in x = rho / h; fitting in x keeps
    // the system well conditioned.
    let mut a = vec![vec![0.0; ncol]; npts];
    let mut b = vec![0.0; npts];
    for i in 0..npts {
        // Chebyshev-Lobatto nodes.
        let x = -(PI * i as f64 / (npts - 1) as f64).cos();
        let mut p = 1.0;
        for c in 0..ncol {
            a[i][c] = p;
            p *= x;
        }
        b[i] = gamma_u(x * FIT_HALF_WIDTH, u);
    }
    let coef = least_squares(a, b, ncol);
    coef.iter()
        .enumerate()
        .map(|(k, c)| c / FIT_HALF_WIDTH.powi(k as i32))
        .collect()
}

/// Householder QR least squares.
fn least_squares(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, ncol: usize) -> Vec<f64> {
    let rows = a.len();
    for c in 0..ncol {
        let norm = (c..rows).map(|r| a[r][c] * a[r][c]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[c][c] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (c..rows).map(|r| a[r][c]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|x| x * x).sum::<f64>();
        if vn == 0.0 {
            continue;
        }
        for j in c..ncol {
            let dot: f64 = (c..rows).map(|r| v[r - c] * a[r][j]).sum();
            let f = 2.0 * dot / vn;
            for r in c..rows {
                a[r][j] -= f * v[r - c];
            }
        }
        let dot: f64 = (c..rows).map(|r| v[r - c] * b[r]).sum();
        let f = 2.0 * dot / vn;
        for r in c..rows {
            b[r] -= f * v[r - c];
        }
    }
    let mut x = vec![0.0; ncol];
    for c in (0..ncol).rev() {
        let s: f64 = (c + 1..ncol).map(|j| a[c][j] * x[j]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_coefficients() {
        assert_eq!(arcsine_coeff(1), 1.0);
        assert_eq!(arcsine_coeff(3), 1.0 / 6.0);
        assert_eq!(arcsine_coeff(5), 3.0 / 40.0);
        assert_eq!(arcsine_coeff(4), 0.0);
        let a = arcsine_coeff(101);
        assert!((0.27..=0.30).contains(&(a * 50f64.powf(1.5))));
        // Both branches agree at the switch.
        let k = 4097u64;
        let direct = {
            let mut c = 1.0;
            for i in 1..=k {
                c *= (2 * i - 1) as f64 / (2 * i) as f64;
            }
            c / (2 * k + 1) as f64
        };
        assert!((arcsine_coeff(2 * k + 1) / direct - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gamma_closed_forms() {
        assert!((gamma_u(1.0, 0.0) - 0.25).abs() < 1e-15);
        assert!((gamma_u(0.5, 0.0) - 1.0 / 12.0).abs() < 1e-15);
        assert!((gamma_u(-1.0, 0.0) + 0.25).abs() < 1e-15);
        // Continuity at the endpoints for u != 0.
        for u in [-1.0, 0.5, 1.0] {
            assert!((gamma_u(1.0 - 1e-12, u) - gamma_u(1.0, u)).abs() < 1e-5, "u={u}");
            assert!((gamma_u(-1.0 + 1e-12, u) - gamma_u(-1.0, u)).abs() < 1e-5, "u={u}");
        }
    }

    #[test]
    fn fitted_level_coefficients_match_hermite() {
        for u in [0.0, 0.5, 1.0] {
            let c = level_coefficients(u, 8);
            for k in 1..=5 {
                let h = level_coeff_hermite(k, u);
                assert!((c[k] - h).abs() < 2e-4, "u={u} k={k}: {} vs {h}", c[k]);
            }
            assert!(c[0].abs() < 1e-10);
        }
        let c = level_coefficients(1.0, 8);
        assert!(c[2] + c[4] > 0.0);
    }
}
