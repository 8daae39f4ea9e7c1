//! Scalar abstraction over exact rationals and binary doubles, plus the
//! textual encodings used by certificate files.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

/// Field elements a rigid motion can be built from.
pub trait Scalar: Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    /// True when arithmetic is exact and comparisons are decisive.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact rational value; `None` for non-finite floats.
    fn to_rational(&self) -> Option<Rational>;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Option<Rational> {
        Rational::from_f64(*self)
    }
}

/// A quantity that is exact when the underlying shape allows it.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Exact(Rational),
    Approx(f64),
}

impl Measure {
    pub fn to_f64(&self) -> f64 {
        match self {
            Measure::Exact(r) => Scalar::to_f64(r),
            Measure::Approx(v) => *v,
        }
    }
}

pub fn rational(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn integer(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Canonical `p/q` encoding: `q > 0`, `gcd(p, q) = 1`, denominator always
/// written (`1/1`, `0/1`).
pub fn format_fraction(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses the canonical `p/q` form, rejecting unreduced or signed denominators.
pub fn parse_fraction(s: &str) -> Result<Rational> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| Error::Parse(format!("expected p/q, got {s:?}")))?;
    let p = parse_int(p, s)?;
    if q.starts_with(['+', '-']) {
        return Err(Error::Parse(format!("denominator must be unsigned in {s:?}")));
    }
    let q = parse_int(q, s)?;
    if q.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    if !p.gcd(&q).is_one() {
        return Err(Error::Parse(format!("fraction {s:?} is not reduced")));
    }
    Ok(Rational::new_raw(p, q))
}

fn parse_int(digits: &str, whole: &str) -> Result<BigInt> {
    let body = digits.strip_prefix('-').unwrap_or(digits);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("malformed integer in {whole:?}")));
    }
    digits
        .parse::<BigInt>()
        .map_err(|e| Error::Parse(format!("{whole:?}: {e}")))
}

/// Lenient rational parser for command-line parameters and CSV cells:
/// accepts `p/q` (any sign/reduction), integers, and finite decimals such as
/// `1.05` or `-2.5e-3`, all converted exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_int(p.trim(), s)?;
        let q = parse_int(q.trim(), s)?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(at) => {
            let exp: i32 = s[at + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (&s[..at], exp)
        }
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("not a number: {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("not a number: {s:?}")));
    }
    let mut value = Rational::from_integer(digits.parse::<BigInt>().unwrap_or_default());
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// The rational with the smallest denominator (then smallest magnitude) in
/// the closed interval `[lo, hi]`.
pub fn simplest_in_interval(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi, "empty interval");
    if !lo.is_positive() && !hi.is_negative() {
        return Rational::zero();
    }
    if hi.is_negative() {
        return -simplest_in_interval(&-hi, &-lo);
    }
    let floor = lo.floor();
    if &floor == lo {
        return floor;
    }
    let next = &floor + Rational::one();
    if &next <= hi {
        return next;
    }
    // lo and hi share the integer part; recurse on the reciprocal tails.
    let inner = simplest_in_interval(&(hi - &floor).recip(), &(lo - &floor).recip());
    floor + inner.recip()
}

pub(crate) fn min_of<S: PartialOrd + Clone>(a: &S, b: &S) -> S {
    if b < a {
        b.clone()
    } else {
        a.clone()
    }
}

pub(crate) fn max_of<S: PartialOrd + Clone>(a: &S, b: &S) -> S {
    if b > a {
        b.clone()
    } else {
        a.clone()
    }
}

pub(crate) fn norm_f64(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
