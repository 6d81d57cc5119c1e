//! Exact rational helpers shared by the region, integrator and exponent
//! modules: parsing, canonical `p/q` formatting, and directed rounding to
//! `f64`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as an exact rational")]
pub struct ParseRationalError {
    pub input: String,
}

/// Shorthand for the rational `n/d`.
///
/// Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, plain decimals (`"0.1680"`, `"-3"`, `"1e-4"`) and
/// quotients of decimals (`"1/5.02"`) into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError { input: s.to_string() };
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    match t.split_once('/') {
        Some((num, den)) => {
            let n = parse_decimal(num.trim()).ok_or_else(err)?;
            let d = parse_decimal(den.trim()).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(n / d)
        }
        None => parse_decimal(t).ok_or_else(err),
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let scale = exp - i32::try_from(frac_part.len()).ok()?;
    let ten = BigInt::from(10);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

/// Canonical `p/q` string (always with an explicit denominator).
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Display adapter printing a rational as `p/q`.
pub struct PQ<'a>(pub &'a Rational);

impl fmt::Display for PQ<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

fn approx_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back on scaling both parts for huge numerators and denominators.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

fn cmp_exact(x: f64, r: &Rational) -> Ordering {
    match Rational::from_float(x) {
        Some(xr) => xr.cmp(r),
        None if x > 0.0 => Ordering::Greater,
        None => Ordering::Less,
    }
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let b = x.to_bits();
    f64::from_bits(if x > 0.0 { b + 1 } else { b - 1 })
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Smallest double that is `>= r`.
pub fn to_f64_up(r: &Rational) -> f64 {
    let mut x = approx_f64(r);
    while cmp_exact(x, r) == Ordering::Less {
        x = next_up(x);
    }
    while cmp_exact(next_down(x), r) != Ordering::Less {
        x = next_down(x);
    }
    x
}

/// Largest double that is `<= r`.
pub fn to_f64_down(r: &Rational) -> f64 {
    let mut x = approx_f64(r);
    while cmp_exact(x, r) == Ordering::Greater {
        x = next_down(x);
    }
    while cmp_exact(next_up(x), r) != Ordering::Greater {
        x = next_up(x);
    }
    x
}

pub fn floor_to_i64(r: &Rational) -> Option<i64> {
    r.floor().to_integer().to_i64()
}

pub fn ceil_to_i64(r: &Rational) -> Option<i64> {
    r.ceil().to_integer().to_i64()
}

pub fn min_rat<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_rat<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Serde adapter storing a rational as a `"p/q"` string.
pub mod serde_pq {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>` as an array of `"p/q"` strings.
pub mod serde_pq_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&fmt_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}

/// Serde adapter for `Vec<(Rational, Rational)>` as `[["p/q","p/q"], ...]`.
pub mod serde_pq_pairs {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[(Rational, Rational)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for (a, b) in v {
            seq.serialize_element(&[fmt_rational(a), fmt_rational(b)])?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(Rational, Rational)>, D::Error> {
        let v = Vec::<[String; 2]>::deserialize(d)?;
        v.iter()
            .map(|[a, b]| {
                let a = parse_rational(a).map_err(serde::de::Error::custom)?;
                let b = parse_rational(b).map_err(serde::de::Error::custom)?;
                Ok((a, b))
            })
            .collect()
    }
}
