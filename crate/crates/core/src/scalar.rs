//! Scalar field abstraction with an exact rational mode and a binary
//! floating point mode.
//!
//! Every construction in the crate is generic over [`Scalar`]; a single
//! computation never mixes the two modes.

use std::fmt::{self, Debug, Display};
use std::str::FromStr;

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Num;
use serde::de::{self, Deserializer, Visitor};
use thiserror::Error;

/// Exact arbitrary precision rational.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse scalar {text:?}: {reason}")]
pub struct ParseScalarError {
    pub text: String,
    pub reason: String,
}

impl ParseScalarError {
    fn new(text: &str, reason: impl Into<String>) -> Self {
        Self {
            text: text.to_owned(),
            reason: reason.into(),
        }
    }
}

/// Arithmetic mode selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown arithmetic mode {other:?}")),
        }
    }
}

pub trait Scalar:
    Clone + Debug + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static
{
    const MODE: Mode;

    /// Parses a decimal string (`"0.25"`, `"-3"`, `"1e-3"`) or a ratio `"p/q"`.
    fn parse(text: &str) -> Result<Self, ParseScalarError>;

    /// Canonical textual form: `"p/q"` (or `"p"`) in exact mode, the
    /// shortest round-tripping decimal in float mode.
    fn render(&self) -> String;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_f64_lossy(value: f64) -> Self;

    fn approx_f64(&self) -> f64;

    /// Square root of a nonnegative value. Exact when the argument is a
    /// perfect rational square; otherwise, in exact mode, the smallest
    /// upper bound on the grid `1/(den * 2^64)` (never below the true root).
    fn sqrt_upper(&self) -> Self;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `self > 0`; unlike `Signed::is_positive`, false for `-0.0` and `0.0`.
    fn gt_zero(&self) -> bool {
        *self > Self::zero()
    }

    fn lt_zero(&self) -> bool {
        *self < Self::zero()
    }

    /// Default slack for simplex sums and metric axioms.
    fn default_tolerance() -> Self;
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn parse(text: &str) -> Result<Self, ParseScalarError> {
        parse_rational(text)
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64_lossy(value: f64) -> Self {
        BigRational::from_float(value).expect("finite float")
    }

    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt_upper(&self) -> Self {
        assert!(!self.is_negative(), "square root of a negative rational");
        let n = self.numer();
        let d = self.denom();
        let nd = n * d;
        let root = nd.sqrt();
        if &root * &root == nd {
            return BigRational::new(root, d.clone());
        }
        let scale = BigInt::one() << 64u32;
        let scaled = &nd * &scale * &scale;
        let r = scaled.sqrt();
        let up = if &r * &r == scaled { r } else { r + 1 };
        BigRational::new(up, d * scale)
    }

    fn default_tolerance() -> Self {
        Rational::zero()
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn parse(text: &str) -> Result<Self, ParseScalarError> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| ParseScalarError::new(text, "bad numerator"))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| ParseScalarError::new(text, "bad denominator"))?;
            if q == 0.0 {
                return Err(ParseScalarError::new(text, "zero denominator"));
            }
            return Ok(p / q);
        }
        let v: f64 = text
            .parse()
            .map_err(|_| ParseScalarError::new(text, "not a number"))?;
        if !v.is_finite() {
            return Err(ParseScalarError::new(text, "not finite"));
        }
        Ok(v)
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64_lossy(value: f64) -> Self {
        value
    }

    fn approx_f64(&self) -> f64 {
        *self
    }

    fn sqrt_upper(&self) -> Self {
        self.sqrt()
    }

    fn default_tolerance() -> Self {
        1e-9
    }
}

fn parse_rational(text: &str) -> Result<Rational, ParseScalarError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(ParseScalarError::new(text, "empty"));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str_radix(p.trim(), 10)
            .map_err(|_| ParseScalarError::new(text, "bad numerator"))?;
        let q = BigInt::from_str_radix(q.trim(), 10)
            .map_err(|_| ParseScalarError::new(text, "bad denominator"))?;
        if q.is_zero() {
            return Err(ParseScalarError::new(text, "zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    // decimal with optional exponent, parsed exactly
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..]
                .parse()
                .map_err(|_| ParseScalarError::new(text, "bad exponent"))?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (sign, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (Sign::Minus, &mantissa[1..]),
        Some(b'+') => (Sign::Plus, &mantissa[1..]),
        _ => (Sign::Plus, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseScalarError::new(text, "no digits"));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(ParseScalarError::new(text, "not a decimal"));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str_radix(&all_digits, 10)
        .map_err(|_| ParseScalarError::new(text, "not a decimal"))?;
    if sign == Sign::Minus {
        numer = -numer;
    }
    let shift = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if shift >= 0 {
        BigRational::from_integer(numer * num::pow(ten, shift as usize))
    } else {
        BigRational::new(numer, num::pow(ten, (-shift) as usize))
    };
    Ok(value)
}

/// Serde helper: accepts a JSON string (decimal or `p/q`) or a JSON number.
pub fn deserialize_scalar<'de, S: Scalar, D: Deserializer<'de>>(d: D) -> Result<S, D::Error> {
    struct V<S>(std::marker::PhantomData<S>);

    impl<'de, S: Scalar> Visitor<'de> for V<S> {
        type Value = S;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a decimal string, a \"p/q\" string, or a number")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<S, E> {
            S::parse(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<S, E> {
            Ok(S::from_ratio(v, 1))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<S, E> {
            S::parse(&v.to_string()).map_err(E::custom)
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<S, E> {
            // shortest round-trip text keeps decimal literals like 0.7 exact
            S::parse(&format!("{v}")).map_err(E::custom)
        }
    }

    d.deserialize_any(V(std::marker::PhantomData))
}

/// Parses a JSON value as a scalar.
pub fn scalar_from_json<S: Scalar>(v: &serde_json::Value) -> Result<S, ParseScalarError> {
    match v {
        serde_json::Value::String(s) => S::parse(s),
        serde_json::Value::Number(n) => S::parse(&n.to_string()),
        other => Err(ParseScalarError::new(&other.to_string(), "expected string or number")),
    }
}

pub fn scalar_to_json<S: Scalar>(v: &S) -> serde_json::Value {
    serde_json::Value::String(v.render())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(Rational::parse("0.7").unwrap(), q(7, 10));
        assert_eq!(Rational::parse("-0.25").unwrap(), q(-1, 4));
        assert_eq!(Rational::parse("2/5").unwrap(), q(2, 5));
        assert_eq!(Rational::parse("3").unwrap(), q(3, 1));
        assert_eq!(Rational::parse("1e-3").unwrap(), q(1, 1000));
        assert_eq!(Rational::parse(".5").unwrap(), q(1, 2));
        assert_eq!(Rational::parse("1.5E2").unwrap(), q(150, 1));
        assert!(Rational::parse("abc").is_err());
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse("").is_err());
    }

    #[test]
    fn renders_canonically() {
        assert_eq!(q(4, 10).render(), "2/5");
        assert_eq!(q(3, 1).render(), "3");
        assert_eq!(0.25f64.render(), "0.25");
        assert_eq!(f64::parse("1/4").unwrap(), 0.25);
    }

    #[test]
    fn rational_sqrt_is_exact_on_squares_and_an_upper_bound_otherwise() {
        assert_eq!(q(9, 4).sqrt_upper(), q(3, 2));
        assert_eq!(q(0, 1).sqrt_upper(), q(0, 1));
        let two = q(2, 1);
        let r = two.sqrt_upper();
        assert!(&r * &r >= two);
        assert!((r.approx_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn json_numbers_keep_decimal_literals() {
        let v: serde_json::Value = serde_json::from_str("0.7").unwrap();
        assert_eq!(scalar_from_json::<Rational>(&v).unwrap(), q(7, 10));
    }
}
