//! Arbitrary-precision rationals and their wire format.
//!
//! Every exact probability in the crate is a [`Rational`]. On the wire a
//! rational is the object `{"num": <int>, "den": <int>}` with a positive,
//! reduced denominator. Integers that do not fit in an `i64` are written as
//! decimal strings so that no precision is lost.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

/// Builds `num/den`. Panics when `den` is zero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Nearest `f64`. Falls back to a two-step division when the parts overflow.
pub fn to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        return v;
    }
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// `num/den` text form, e.g. `3/11`, `0/1`, `-1/7`.
pub fn fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("decimal `{0}` has no exact binary expansion; write it as a fraction such as `{1}`")]
    NotDyadic(String, String),
}

/// Parses `num/den`, an integer, or a dyadic decimal (`0.25`, `-1.125`).
///
/// Decimals whose reduced denominator is not a power of two are rejected so
/// that no input is silently rounded.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let malformed = || ParseRationalError::Malformed(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let num = BigInt::from_str(n.trim()).map_err(|_| malformed())?;
        let den = BigInt::from_str(d.trim()).map_err(|_| malformed())?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(malformed());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(malformed());
    }
    let digits = format!("{whole}{frac}");
    let mut num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
        .map_err(|_| malformed())?;
    if negative {
        num = -num;
    }
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let value = Rational::new(num, den);
    if !is_power_of_two(value.denom()) {
        return Err(ParseRationalError::NotDyadic(
            s.to_string(),
            fraction_string(&value),
        ));
    }
    Ok(value)
}

fn is_power_of_two(n: &BigInt) -> bool {
    n.is_positive() && (n & (n - BigInt::one())).is_zero()
}

/// Serde adapter for a [`Rational`] rendered as `{"num","den"}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactValue(pub Rational);

impl From<Rational> for ExactValue {
    fn from(r: Rational) -> Self {
        ExactValue(r)
    }
}

impl From<&Rational> for ExactValue {
    fn from(r: &Rational) -> Self {
        ExactValue(r.clone())
    }
}

impl From<ExactValue> for Rational {
    fn from(v: ExactValue) -> Self {
        v.0
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fraction_string(&self.0))
    }
}

enum WireInt<'a> {
    Small(i64),
    Big(&'a BigInt),
}

impl Serialize for WireInt<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            WireInt::Small(v) => s.serialize_i64(*v),
            WireInt::Big(b) => s.serialize_str(&b.to_string()),
        }
    }
}

fn wire_int(b: &BigInt) -> WireInt<'_> {
    b.to_i64().map_or(WireInt::Big(b), WireInt::Small)
}

impl Serialize for ExactValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rational", 2)?;
        st.serialize_field("num", &wire_int(self.0.numer()))?;
        st.serialize_field("den", &wire_int(self.0.denom()))?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IntOrString {
    Int(i64),
    Uint(u64),
    Text(String),
}

impl IntOrString {
    fn into_bigint<E: de::Error>(self) -> Result<BigInt, E> {
        match self {
            IntOrString::Int(v) => Ok(BigInt::from(v)),
            IntOrString::Uint(v) => Ok(BigInt::from(v)),
            IntOrString::Text(t) => BigInt::from_str(t.trim())
                .map_err(|_| E::custom(format!("invalid integer `{t}`"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRational {
    num: IntOrString,
    den: IntOrString,
}

impl<'de> Deserialize<'de> for ExactValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawRational::deserialize(d)?;
        let num = raw.num.into_bigint::<D::Error>()?;
        let den = raw.den.into_bigint::<D::Error>()?;
        if den.is_zero() {
            return Err(de::Error::custom("rational with zero denominator"));
        }
        Ok(ExactValue(Rational::new(num, den)))
    }
}

/// `#[serde(with = "exact")]` for a bare [`Rational`] field.
pub mod exact {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        ExactValue(r.clone()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        ExactValue::deserialize(d).map(|v| v.0)
    }
}

/// `#[serde(with = "exact_opt")]` for an `Option<Rational>` field.
pub mod exact_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        r.as_ref().map(|v| ExactValue(v.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<ExactValue>::deserialize(d).map(|o| o.map(|v| v.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("1/12").unwrap(), ratio(1, 12));
        assert_eq!(parse_rational(" -2/4 ").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("3").unwrap(), int(3));
    }

    #[test]
    fn parses_dyadic_decimals_exactly() {
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-1.125").unwrap(), ratio(-9, 8));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0.50").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_non_dyadic_decimal_with_fraction_hint() {
        let err = parse_rational("0.1").unwrap_err();
        assert_eq!(
            err,
            ParseRationalError::NotDyadic("0.1".into(), "1/10".into())
        );
        assert!(err.to_string().contains("1/10"));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_rational(""), Err(ParseRationalError::Empty)));
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn wire_format_is_num_den() {
        let v = ExactValue(ratio(3, 11));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"num":3,"den":11}"#);
        let back: ExactValue = serde_json::from_str(r#"{"num":6,"den":22}"#).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn huge_integers_travel_as_strings() {
        let big = Rational::new(num_traits::pow(BigInt::from(10), 30), BigInt::from(7));
        let json = serde_json::to_string(&ExactValue(big.clone())).unwrap();
        assert!(json.contains(r#""num":"1000000000000000000000000000000""#));
        let back: ExactValue = serde_json::from_str(&json).unwrap();
        assert_eq!(back.0, big);
    }

    #[test]
    fn zero_denominator_rejected_on_wire() {
        assert!(serde_json::from_str::<ExactValue>(r#"{"num":1,"den":0}"#).is_err());
    }
}
