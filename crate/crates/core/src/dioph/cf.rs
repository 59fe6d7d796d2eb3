use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::real::Surd;
use crate::{Error, Result};

/// The first `count` convergents `p_j / q_j` of `x`.
///
/// Rational inputs stop at their last convergent. Irrational inputs run the
/// expansion on a rigorous enclosure and fail once the enclosure no longer
/// determines the next partial quotient.
pub fn cf_convergents(x: &Surd, count: usize, bits: u32) -> Result<Vec<(i64, i64)>> {
    expand(x, count, u64::MAX, bits)
}

/// Convergents with `q <= qmax`, without a count limit.
pub fn cf_convergents_upto(x: &Surd, qmax: u64, bits: u32) -> Result<Vec<(i64, i64)>> {
    let mut v = expand(x, usize::MAX, qmax, bits)?;
    v.retain(|&(_, q)| q as u64 <= qmax);
    Ok(v)
}

fn expand(x: &Surd, count: usize, qmax: u64, bits: u32) -> Result<Vec<(i64, i64)>> {
    let mut out = Vec::new();
    let (mut p0, mut q0) = (BigInt::from(1), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::from(1));
    let mut push = |a: &BigInt, out: &mut Vec<(i64, i64)>| -> Result<()> {
        let p = a * &p0 + &p1;
        let q = a * &q0 + &q1;
        p1 = core::mem::replace(&mut p0, p.clone());
        q1 = core::mem::replace(&mut q0, q.clone());
        let conv = (p.to_i64(), q.to_i64());
        match conv {
            (Some(p), Some(q)) => {
                out.push((p, q));
                Ok(())
            }
            _ => Err(Error::Overflow(format!("convergent {p}/{q} exceeds i64"))),
        }
    };
    if x.is_rational() {
        let mut v = x.coeff.clone() * BigRational::from_integer(BigInt::from(1));
        while out.len() < count && out.last().map_or(true, |c: &(i64, i64)| c.1 as u64 <= qmax) {
            let a = v.floor().to_integer();
            push(&a, &mut out)?;
            let frac = &v - BigRational::from_integer(a);
            if frac.is_zero() {
                break;
            }
            v = frac.recip();
        }
        return Ok(out);
    }
    let e = x.enclose(bits);
    let (mut lo, mut hi) = (e.lo_rational(), e.hi_rational());
    while out.len() < count && out.last().map_or(true, |c: &(i64, i64)| c.1 as u64 <= qmax) {
        let a = lo.floor().to_integer();
        if hi.floor().to_integer() != a {
            return Err(Error::PrecisionExhausted(format!(
                "partial quotient {} undetermined at {bits} bits",
                out.len()
            )));
        }
        push(&a, &mut out)?;
        let ab = BigRational::from_integer(a);
        let (flo, fhi) = (&lo - &ab, &hi - &ab);
        if flo.is_zero() {
            return Err(Error::PrecisionExhausted(format!(
                "enclosure touches an integer after {} quotients at {bits} bits",
                out.len()
            )));
        }
        lo = fhi.recip();
        hi = flo.recip();
    }
    Ok(out)
}
