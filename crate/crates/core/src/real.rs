//! Frequency descriptors and exact arithmetic on `Q`-linear combinations of
//! square roots.
//!
//! Every descriptor evaluates to a [`Surd`] `c * sqrt(r)` with `c` rational and
//! `r` squarefree. Finite continued fractions, decimals and truncated Liouville
//! sums are rational (`r = 1`). Enclosures at a given bit precision come from
//! an integer square root, so they are rigorous.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Default working precision in mantissa bits.
pub const DEFAULT_PRECISION: u32 = 256;

const GRAMMAR: &str = "expected sqrt:<positive-integer>, dec:<decimal>, cf:<a0,a1,...> or liouville:<base>:<depth>";

/// A real frequency as written by the user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Descriptor {
    Sqrt(u64),
    Decimal(String),
    ContinuedFraction(Vec<i64>),
    Liouville { base: u32, depth: u32 },
}

impl Descriptor {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("`{s}`: {GRAMMAR}")))?;
        let bad = |why: &str| Error::Parse(format!("`{s}`: {why}; {GRAMMAR}"));
        match kind {
            "sqrt" => {
                let n: u64 = body.trim().parse().map_err(|_| bad("not a positive integer"))?;
                if n == 0 {
                    return Err(bad("radicand must be positive"));
                }
                Ok(Descriptor::Sqrt(n))
            }
            "dec" => {
                parse_decimal(body.trim()).ok_or_else(|| bad("not a decimal string"))?;
                Ok(Descriptor::Decimal(body.trim().to_string()))
            }
            "cf" => {
                let qs: core::result::Result<Vec<i64>, _> = body.split(',').map(|t| t.trim().parse::<i64>()).collect();
                let qs = qs.map_err(|_| bad("partial quotients must be integers"))?;
                if qs.is_empty() || qs[1..].iter().any(|&a| a <= 0) {
                    return Err(bad("partial quotients after the first must be positive"));
                }
                Ok(Descriptor::ContinuedFraction(qs))
            }
            "liouville" => {
                let (b, k) = body.split_once(':').ok_or_else(|| bad("missing depth"))?;
                let base: u32 = b.trim().parse().map_err(|_| bad("bad base"))?;
                let depth: u32 = k.trim().parse().map_err(|_| bad("bad depth"))?;
                if base < 2 || depth == 0 {
                    return Err(bad("need base >= 2 and depth >= 1"));
                }
                if depth > 9 {
                    return Err(Error::PrecisionExhausted(format!(
                        "liouville depth {depth}: base^(depth!) is beyond the supported size"
                    )));
                }
                Ok(Descriptor::Liouville { base, depth })
            }
            _ => Err(Error::Parse(format!("`{s}`: unknown kind `{kind}`; {GRAMMAR}"))),
        }
    }

    /// Exact value.
    pub fn value(&self) -> Surd {
        match self {
            Descriptor::Sqrt(n) => Surd::sqrt(*n),
            Descriptor::Decimal(s) => Surd::rational(parse_decimal(s).expect("validated at parse")),
            Descriptor::ContinuedFraction(qs) => {
                let mut v = BigRational::from_integer(BigInt::from(*qs.last().unwrap()));
                for &a in qs[..qs.len() - 1].iter().rev() {
                    v = BigRational::from_integer(BigInt::from(a)) + v.recip();
                }
                Surd::rational(v)
            }
            Descriptor::Liouville { base, depth } => Surd::rational(liouville_sum(*base, *depth)),
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Sqrt(n) => write!(f, "sqrt:{n}"),
            Descriptor::Decimal(s) => write!(f, "dec:{s}"),
            Descriptor::ContinuedFraction(qs) => {
                f.write_str("cf:")?;
                for (i, a) in qs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                Ok(())
            }
            Descriptor::Liouville { base, depth } => write!(f, "liouville:{base}:{depth}"),
        }
    }
}

impl core::str::FromStr for Descriptor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Descriptor::parse(s)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut all = String::from(int);
    all.push_str(frac);
    let num: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().ok()?
    };
    let den = num_traits::pow(BigInt::from(10u32), frac.len());
    let v = BigRational::new(num, den);
    Some(if neg { -v } else { v })
}

/// `sum_{k=1}^{depth} base^{-k!}` exactly.
pub fn liouville_sum(base: u32, depth: u32) -> BigRational {
    let mut sum = BigRational::zero();
    let mut fact: usize = 1;
    for k in 1..=depth as usize {
        fact *= k;
        let den = num_traits::pow(BigInt::from(base), fact);
        sum += BigRational::new(BigInt::one(), den);
    }
    sum
}

/// `coeff * sqrt(radicand)` with `radicand` squarefree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd {
    pub coeff: BigRational,
    pub radicand: u64,
}

impl Surd {
    pub fn rational(v: BigRational) -> Self {
        Surd { coeff: v, radicand: 1 }
    }

    pub fn integer(v: i64) -> Self {
        Surd::rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn sqrt(n: u64) -> Self {
        let (outside, inside) = squarefree_split(n);
        Surd {
            coeff: BigRational::from_integer(BigInt::from(outside)),
            radicand: inside,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.radicand == 1 || self.coeff.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.coeff.to_f64().unwrap_or(f64::NAN) * libm::sqrt(self.radicand as f64)
    }

    /// Floor/ceil enclosure `[lo, hi] / 2^bits`.
    pub fn enclose(&self, bits: u32) -> Dyadic {
        let scale = BigInt::one() << bits;
        if self.radicand == 1 {
            let num = self.coeff.numer() * &scale;
            let (lo, hi) = floor_ceil_div(&num, self.coeff.denom());
            return Dyadic { lo, hi, bits };
        }
        // sqrt(r) * 2^bits bracketed by an integer square root, then scaled by the
        // rational coefficient with outward rounding.
        let r4 = BigUint::from(self.radicand) << (2 * bits);
        let s = r4.sqrt();
        let s_lo = BigInt::from(s.clone());
        let s_hi = if &s * &s == r4 { s_lo.clone() } else { s_lo.clone() + 1 };
        let (a, b) = (self.coeff.numer(), self.coeff.denom());
        let (p1, p2) = (a * &s_lo, a * &s_hi);
        let (mn, mx) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let (lo, _) = floor_ceil_div(&mn, b);
        let (_, hi) = floor_ceil_div(&mx, b);
        Dyadic { lo, hi, bits }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand == 1 {
            write!(f, "{}", self.coeff)
        } else {
            write!(f, "({})*sqrt({})", self.coeff, self.radicand)
        }
    }
}

fn floor_ceil_div(a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
    let (q, r) = a.div_mod_floor(b);
    if r.is_zero() {
        (q.clone(), q)
    } else {
        let c = &q + 1;
        (q, c)
    }
}

/// Split `n = outside^2 * inside` with `inside` squarefree.
pub fn squarefree_split(n: u64) -> (u64, u64) {
    let mut outside = 1u64;
    let mut rest = n;
    let mut p = 2u64;
    // Remove squares of primes up to the cube root; what remains has at most two
    // prime factors above that bound, so it is squarefree unless a perfect square.
    while p.saturating_mul(p).saturating_mul(p) <= n {
        while rest % (p * p) == 0 {
            rest /= p * p;
            outside *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut small = 1u64;
    let mut big = rest;
    let mut p = 2u64;
    while p.saturating_mul(p).saturating_mul(p) <= n {
        if big % p == 0 {
            big /= p;
            small *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = isqrt_u64(big);
    if r > 1 && r * r == big {
        (outside * r, small)
    } else {
        (outside, rest)
    }
}

fn isqrt_u64(n: u64) -> u64 {
    let mut r = libm::sqrt(n as f64) as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Closed dyadic interval `[lo, hi] / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub lo: BigInt,
    pub hi: BigInt,
    pub bits: u32,
}

impl Dyadic {
    pub fn width_ulps(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn lo_f64(&self) -> f64 {
        dyadic_to_f64(&self.lo, self.bits)
    }

    pub fn hi_f64(&self) -> f64 {
        dyadic_to_f64(&self.hi, self.bits)
    }

    pub fn scale(&self, k: i64) -> Dyadic {
        let (a, b) = (&self.lo * k, &self.hi * k);
        if k >= 0 {
            Dyadic {
                lo: a,
                hi: b,
                bits: self.bits,
            }
        } else {
            Dyadic {
                lo: b,
                hi: a,
                bits: self.bits,
            }
        }
    }

    pub fn add(&self, o: &Dyadic) -> Dyadic {
        debug_assert_eq!(self.bits, o.bits);
        Dyadic {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
            bits: self.bits,
        }
    }

    pub fn add_integer(&self, k: i64) -> Dyadic {
        let s = BigInt::from(k) << self.bits;
        Dyadic {
            lo: &self.lo + &s,
            hi: &self.hi + &s,
            bits: self.bits,
        }
    }

    /// `floor(x + 1/2)` if it is the same for every point of the interval.
    pub fn round_nearest(&self) -> Option<BigInt> {
        let half = BigInt::one() << (self.bits - 1);
        let a = (&self.lo + &half) >> self.bits;
        let b = (&self.hi + &half) >> self.bits;
        (a == b).then_some(a)
    }

    pub fn floor(&self) -> Option<BigInt> {
        let a = &self.lo >> self.bits;
        let b = &self.hi >> self.bits;
        (a == b).then_some(a)
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn lo_rational(&self) -> BigRational {
        BigRational::new(self.lo.clone(), BigInt::one() << self.bits)
    }

    pub fn hi_rational(&self) -> BigRational {
        BigRational::new(self.hi.clone(), BigInt::one() << self.bits)
    }
}

/// `num / 2^bits` rounded to a nearby `f64`.
pub fn dyadic_to_f64(num: &BigInt, bits: u32) -> f64 {
    let nb = num.bits() as i64;
    let shift = nb - 64;
    if shift > 0 {
        let m = (num >> shift as usize).to_f64().unwrap_or(f64::NAN);
        m * libm::exp2((shift - bits as i64) as f64)
    } else {
        num.to_f64().unwrap_or(f64::NAN) * libm::exp2(-(bits as f64))
    }
}

/// A `Q`-linear combination of square roots of squarefree integers.
///
/// Square roots of distinct squarefree integers are linearly independent over
/// `Q`, so the value is zero exactly when every coefficient vanishes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuadraticForm {
    terms: BTreeMap<u64, BigRational>,
}

impl QuadraticForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_surd(&mut self, s: &Surd, k: i64) {
        if k == 0 || s.coeff.is_zero() {
            return;
        }
        let e = self.terms.entry(s.radicand).or_insert_with(BigRational::zero);
        *e += &s.coeff * BigRational::from_integer(BigInt::from(k));
        if e.is_zero() {
            self.terms.remove(&s.radicand);
        }
    }

    pub fn add_integer(&mut self, k: i64) {
        self.add_surd(&Surd::integer(1), k);
    }

    pub fn add_rational(&mut self, v: &BigRational) {
        if v.is_zero() {
            return;
        }
        let e = self.terms.entry(1).or_insert_with(BigRational::zero);
        *e += v;
        if e.is_zero() {
            self.terms.remove(&1);
        }
    }

    pub fn add_form(&mut self, o: &QuadraticForm) {
        for (&r, c) in &o.terms {
            self.add_surd(
                &Surd {
                    coeff: c.clone(),
                    radicand: r,
                },
                1,
            );
        }
    }

    /// Exact product; `sqrt(a) sqrt(b) = s sqrt(t)` with `ab = s^2 t`.
    pub fn mul(&self, o: &QuadraticForm) -> QuadraticForm {
        let mut out = QuadraticForm::new();
        for (&a, ca) in &self.terms {
            for (&b, cb) in &o.terms {
                let g = a.gcd(&b);
                // ab = g^2 (a/g)(b/g), and a/g, b/g are coprime squarefree.
                let t = (a / g).checked_mul(b / g).expect("radicand product overflows u64");
                let coeff = ca * cb * BigRational::from_integer(BigInt::from(g));
                out.add_surd(&Surd { coeff, radicand: t }, 1);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The exact value when it is rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn enclose(&self, bits: u32) -> Dyadic {
        let mut acc = Dyadic {
            lo: BigInt::zero(),
            hi: BigInt::zero(),
            bits,
        };
        for (&r, c) in &self.terms {
            acc = acc.add(
                &Surd {
                    coeff: c.clone(),
                    radicand: r,
                }
                .enclose(bits),
            );
        }
        acc
    }

    /// Exact sign, refining the enclosure up to `max_bits`.
    pub fn signum(&self, bits: u32, max_bits: u32) -> Result<i32> {
        if self.is_zero() {
            return Ok(0);
        }
        let mut b = bits;
        loop {
            let e = self.enclose(b);
            if e.lo.is_positive() {
                return Ok(1);
            }
            if e.hi.is_negative() {
                return Ok(-1);
            }
            if b >= max_bits {
                return Err(Error::PrecisionExhausted(format!(
                    "cannot determine the sign of a nonzero quadratic form at {b} bits"
                )));
            }
            b *= 2;
        }
    }
}

/// The `d x m` frequency matrix `omega` with its extended tuple `(1, omega_[k])`.
#[derive(Clone, Debug)]
pub struct Frequencies {
    d: usize,
    m: usize,
    descriptors: Vec<Descriptor>,
    values: Vec<Surd>,
    approx: Vec<f64>,
    precision: u32,
}

impl Frequencies {
    /// `rows[k]` holds the `m` descriptors of axis `k`.
    pub fn new(rows: Vec<Vec<Descriptor>>, precision: u32) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::Invalid("at least one axis is required".into()));
        }
        let m = rows[0].len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Invalid("every axis needs the same number of frequencies".into()));
        }
        if precision < 64 {
            return Err(Error::Invalid("precision must be at least 64 bits".into()));
        }
        let descriptors: Vec<Descriptor> = rows.into_iter().flatten().collect();
        let values: Vec<Surd> = descriptors.iter().map(Descriptor::value).collect();
        for (desc, v) in descriptors.iter().zip(&values) {
            if !v.coeff.is_positive() {
                return Err(Error::Invalid(format!("frequency {desc} must be positive")));
            }
        }
        let approx = values.iter().map(Surd::to_f64).collect();
        Ok(Frequencies {
            d,
            m,
            descriptors,
            values,
            approx,
            precision,
        })
    }

    /// The same row of descriptors on every one of `d` axes.
    pub fn tensor(row: Vec<Descriptor>, d: usize, precision: u32) -> Result<Self> {
        Frequencies::new(alloc::vec![row; d], precision)
    }

    /// Parses `"sqrt:2 sqrt:3; sqrt:5 sqrt:7"`: axes split by `;`, entries by whitespace.
    pub fn parse(s: &str, precision: u32) -> Result<Self> {
        let rows: Result<Vec<Vec<Descriptor>>> = s
            .split(';')
            .map(|row| row.split_whitespace().map(Descriptor::parse).collect())
            .collect();
        Frequencies::new(rows?, precision)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Lattice dimension `M = d (m + 1)`.
    pub fn lattice_dim(&self) -> usize {
        self.d * (self.m + 1)
    }

    pub fn descriptor(&self, k: usize, i: usize) -> &Descriptor {
        &self.descriptors[k * self.m + i]
    }

    /// `omega_[k],i` for `i` in `0..m` (zero-based, excluding the unit base).
    pub fn omega(&self, k: usize, i: usize) -> &Surd {
        &self.values[k * self.m + i]
    }

    pub fn omega_f64(&self, k: usize, i: usize) -> f64 {
        self.approx[k * self.m + i]
    }

    pub fn row(&self, k: usize) -> &[Surd] {
        &self.values[k * self.m..(k + 1) * self.m]
    }

    pub fn row_descriptors(&self, k: usize) -> &[Descriptor] {
        &self.descriptors[k * self.m..(k + 1) * self.m]
    }

    /// Extended value `omega-bar_j` for lattice coordinate `j = k (m+1) + i`.
    pub fn bar(&self, j: usize) -> Surd {
        let (k, i) = (j / (self.m + 1), j % (self.m + 1));
        if i == 0 {
            Surd::integer(1)
        } else {
            self.omega(k, i - 1).clone()
        }
    }

    /// Extended tuple as `f64`, axis-major.
    pub fn bar_f64(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.lattice_dim());
        for k in 0..self.d {
            out.push(1.0);
            for i in 0..self.m {
                out.push(self.omega_f64(k, i));
            }
        }
        out
    }

    /// Axes whose extended tuple has repeated entries.
    pub fn degenerate_axes(&self) -> Vec<usize> {
        (0..self.d)
            .filter(|&k| {
                let mut row: Vec<Surd> = self.row(k).to_vec();
                row.push(Surd::integer(1));
                (0..row.len()).any(|a| (a + 1..row.len()).any(|b| row[a] == row[b]))
            })
            .collect()
    }

    /// Human-readable form accepted by [`Frequencies::parse`].
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for k in 0..self.d {
            if k > 0 {
                s.push_str("; ");
            }
            for (i, desc) in self.row_descriptors(k).iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                s.push_str(&desc.to_string());
            }
        }
        s
    }
}

/// Sign of a big integer as -1, 0, 1.
pub fn sign_of(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for s in ["sqrt:2", "dec:1.5", "cf:0,10,10,100", "liouville:10:4"] {
            assert_eq!(Descriptor::parse(s).unwrap().to_string(), s);
        }
        for s in ["sqrt:0", "sqrt:x", "pi", "cf:1,0", "dec:1.2.3", "liouville:1:3"] {
            assert!(matches!(Descriptor::parse(s), Err(Error::Parse(_))), "{s}");
        }
    }

    #[test]
    fn squarefree() {
        assert_eq!(squarefree_split(8), (2, 2));
        assert_eq!(squarefree_split(72), (6, 2));
        assert_eq!(squarefree_split(49), (7, 1));
        assert_eq!(squarefree_split(2 * 101 * 101), (101, 2));
        assert_eq!(squarefree_split(1_000_003 * 1_000_003), (1_000_003, 1));
        assert_eq!(squarefree_split(30), (1, 30));
    }

    #[test]
    fn enclosure_brackets_value() {
        let s = Surd::sqrt(2);
        let e = s.enclose(128);
        assert!(e.lo_f64() <= core::f64::consts::SQRT_2 && core::f64::consts::SQRT_2 <= e.hi_f64());
        assert_eq!(e.width_ulps(), BigInt::one());
    }

    #[test]
    fn continued_fraction_value() {
        let v = Descriptor::parse("cf:1,2,2,2").unwrap().value();
        assert_eq!(v.coeff, BigRational::new(17.into(), 12.into()));
        let l = Descriptor::parse("liouville:2:3").unwrap().value();
        assert_eq!(l.coeff, BigRational::new(49.into(), 64.into()));
    }

    #[test]
    fn quadratic_form_exact_zero() {
        let mut f = QuadraticForm::new();
        f.add_surd(&Surd::sqrt(8), 1);
        f.add_surd(&Surd::sqrt(2), -2);
        assert!(f.is_zero());
        f.add_surd(&Surd::sqrt(3), 1);
        f.add_integer(-2);
        assert_eq!(f.signum(64, 512).unwrap(), -1);
    }

    #[test]
    fn frequency_parsing() {
        let f = Frequencies::parse("sqrt:2 sqrt:3; sqrt:5 sqrt:7", 128).unwrap();
        assert_eq!((f.d(), f.m(), f.lattice_dim()), (2, 2, 6));
        assert_eq!(f.bar(3), Surd::integer(1));
        assert_eq!(f.bar(4), Surd::sqrt(5));
        let g = Frequencies::parse("dec:1", 128).unwrap();
        assert_eq!(g.degenerate_axes(), alloc::vec![0]);
    }
}
