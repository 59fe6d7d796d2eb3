//! Special functions, adaptive quadrature and small numeric helpers.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

pub const PI: f64 = core::f64::consts::PI;

/// `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)`, the Stirling remainder.
///
/// Tabulated for `n <= 15`, the asymptotic series above.
pub fn stirlerr(n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n <= 15 {
        return STIRLERR_SMALL[n as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let x = n as f64;
    let nn = x * x;
    if n > 500 {
        (S0 - S1 / nn) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

const STIRLERR_SMALL: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_26,
    0.041_340_695_955_409_3,
    0.027_677_925_684_998_34,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_193,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_77,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_87,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_53,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_847_5,
    0.005_554_733_551_962_801,
];

/// Deviance term `x ln(x/np) + np - x`, accurate when `x` is close to `np`.
pub fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1;
        loop {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1;
            if j > 1000 {
                return s;
            }
        }
    }
    x * (x / np).ln() + np - x
}

/// Natural log of the binomial pmf `P(Bin(n, p) = k)` (saddle-point form).
pub fn ln_binom_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return n as f64 * (-p).ln_1p();
    }
    if k == n {
        return n as f64 * p.ln();
    }
    let (kf, nf) = (k as f64, n as f64);
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(nf - kf, nf * q);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

/// `P(Bin(n, p) = k)`.
pub fn binom_pmf(k: u64, n: u64, p: f64) -> f64 {
    ln_binom_pmf(k, n, p).exp()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let gln = libm::lgamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (sum.ln() - x + a * x.ln() - gln).exp()
    } else {
        // Lentz continued fraction for Q(a, x).
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        1.0 - (-x + a * x.ln() - gln).exp() * h
    }
}

/// `int_N^inf n^{-s} exp(-c/n) dn` for `s > 1`, `c >= 0`, `N > 0`.
pub fn power_exp_tail(s: f64, c: f64, n0: f64) -> f64 {
    if c <= 0.0 {
        return n0.powf(1.0 - s) / (s - 1.0);
    }
    // Substituting y = c/n gives c^{1-s} * lower_gamma(s - 1, c/N).
    let a = s - 1.0;
    c.powf(-a) * libm::tgamma(a) * gamma_p(a, c / n0)
}

/// Bessel function of the first kind of order one.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= 12.0 { j1_series(ax) } else { j1_hankel(ax) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Power series with term-ratio stopping.
pub fn j1_series(x: f64) -> f64 {
    let h = 0.5 * x;
    let h2 = h * h;
    let mut term = h;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -h2 / (k * (k + 1.0));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 500.0 {
            return sum;
        }
    }
}

fn j1_hankel(x: f64) -> f64 {
    let mu = 4.0;
    let z8 = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 1.0;
    let mut last = f64::INFINITY;
    loop {
        term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * z8);
        if term.abs() >= last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        // Terms alternate between Q (odd k) and P (even k) with signs + - - + ...
        match (k as u64) % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        k += 1.0;
    }
    let chi = x - 0.75 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => return 1.0,
        1 => return 2.0,
        2 => return PI,
        3 => return 4.0 * PI / 3.0,
        _ => {}
    }
    let h = d as f64 / 2.0;
    PI.powf(h) / libm::tgamma(h + 1.0)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Adaptive Gauss-Kronrod (7-15) quadrature of `f` over `[a, b]`.
///
/// Returns `(value, error_estimate)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    use alloc::vec::Vec;
    if a == b {
        return (0.0, 0.0);
    }
    let mut pending: Vec<(f64, f64, u32)> = Vec::new();
    pending.push((a, b, 0));
    let (whole, _) = gk15(&mut f, a, b);
    let mut total = 0.0;
    let mut err = 0.0;
    let scale = whole.abs();
    while let Some((lo, hi, depth)) = pending.pop() {
        let (v, e) = gk15(&mut f, lo, hi);
        let width_share = ((hi - lo) / (b - a)).abs();
        let allowed = (abs_tol.max(rel_tol * scale)) * width_share;
        if e <= allowed || depth >= 40 {
            total += v;
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            pending.push((mid, hi, depth + 1));
            pending.push((lo, mid, depth + 1));
        }
    }
    (total, err)
}

/// Standard normal upper tail `P(X > u)`.
pub fn normal_sf(u: f64) -> f64 {
    0.5 * libm::erfc(u / core::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}
