//! Exact rational scalars and conversions.

use crate::error::{arg, Result};
use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational in reduced form with positive denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"7"`, `"-3/2"` or a finite decimal such as `"1.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return arg("empty rational literal");
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad(s))?;
        let d: BigInt = d.trim().parse().map_err(|_| bad(s))?;
        if d.is_zero() {
            return arg(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad(s));
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip.is_empty() { BigInt::zero() } else { ip.parse().map_err(|_| bad(s))? };
        let frac: BigInt = fp.parse().map_err(|_| bad(s))?;
        let den = num::pow(BigInt::from(10), fp.len());
        let v = Rational::new(whole * &den + frac, den);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad(s))?;
    Ok(Rational::from_integer(n))
}

fn bad(s: &str) -> crate::error::LabError {
    crate::error::LabError::Argument(format!("not an exact rational: {s:?}"))
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Float value of a rational with huge numerator and denominator, without
/// overflowing through `f64::INFINITY / f64::INFINITY`.
pub fn to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let n = q.numer().abs();
    let d = q.denom();
    // pick s so that n * 2^s / d has about 60 significant bits
    let s = 60 - (n.bits() as i64 - d.bits() as i64);
    let quot = if s >= 0 { (n << (s as usize)) / d } else { n / (d << ((-s) as usize)) };
    let v = quot.to_f64().unwrap_or(f64::NAN) * 2f64.powf(-s as f64);
    if q.numer().sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// `big / 2^e` as a float, for path counts that dwarf `f64`.
pub fn big_times_pow2(big: &BigInt, e: i64) -> f64 {
    if big.is_zero() {
        return 0.0;
    }
    let bits = big.bits() as i64;
    let keep = 60i64;
    let (m, extra) = if bits > keep {
        (big >> ((bits - keep) as usize), bits - keep)
    } else {
        (big.clone(), 0)
    };
    m.to_f64().unwrap_or(f64::NAN) * 2f64.powf((e + extra) as f64)
}

pub fn pow(q: &Rational, e: u32) -> Rational {
    num::pow(q.clone(), e as usize)
}

/// `q^e` for a signed exponent; `q` must be nonzero when `e < 0`.
pub fn powi(q: &Rational, e: i64) -> Rational {
    let p = num::pow(q.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn is_one(q: &Rational) -> bool {
    q.is_one()
}
