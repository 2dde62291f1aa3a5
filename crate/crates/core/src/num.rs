//! Exact arithmetic helpers.
//!
//! Every solving path works on [`Rational`] (arbitrary precision) or on the
//! [`Exact`] abstraction, which the enumeration engine instantiates with
//! scaled `i128` integers when the instance fits.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `max(v, 0)`.
pub fn pos(v: &Rational) -> Rational {
    if v.is_negative() {
        Rational::zero()
    } else {
        v.clone()
    }
}

pub fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Canonical text form: `"7"` for integers, `"79/8"` otherwise.
pub fn format_rational(v: &Rational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not an exact number: {:?}", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

/// Parses `"12"`, `"-3/2"` or a finite decimal such as `"0.25"`, exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let t = text.trim();
    let err = || ParseRationalError(text.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if t.contains('/') {
        let v = Rational::from_str(t).map_err(|_| err())?;
        return Ok(v);
    }
    if let Some((whole, fractional)) = t.split_once('.') {
        if fractional.is_empty() || !fractional.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{whole_digits}{fractional}");
        let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
        let denom = num_traits::pow(BigInt::from(10), fractional.len());
        let v = Rational::new(numer, denom);
        return Ok(if negative { -v } else { v });
    }
    let n = BigInt::from_str(t).map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

/// Least common multiple of all denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::from(1), |acc, v| acc.lcm(v.denom()))
}

/// Serde adapter storing a rational as its canonical string.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Ordered ring with exact arithmetic, used by the enumeration engine.
pub trait Exact:
    Clone + Ord + fmt::Debug + Send + Sync + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    fn from_i64(v: i64) -> Self;
}

impl Exact for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
}

impl Exact for Rational {
    fn from_i64(v: i64) -> Self {
        int(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/2").unwrap(), frac(3, 2));
        assert_eq!(parse_rational("-4").unwrap(), int(-4));
        assert_eq!(parse_rational("0.25").unwrap(), frac(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), frac(-3, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&frac(158, 16)), "79/8");
        assert_eq!(format_rational(&int(11)), "11");
        assert_eq!(format_rational(&frac(-6, 4)), "-3/2");
    }

    #[test]
    fn lcm_of_denominators() {
        let vals = [frac(1, 4), frac(5, 6), int(3)];
        assert_eq!(common_denominator(vals.iter()), BigInt::from(12));
    }
}
