//! Scalar fields used throughout the crate.
//!
//! Every computation is generic over [`Scalar`], which is implemented for
//! arbitrary-precision rationals ([`Rational`], exact mode) and `f64`
//! (float mode). Exact mode never rounds: an operation whose result is not
//! rational (an exponential, say) reports that instead of approximating.

use std::fmt;
use std::str::FromStr;

use num::traits::NumAssignRef;
use num::{BigInt, BigRational, Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Absolute tolerance for float-mode zero tests, scaled by input magnitude.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Config(format!("unknown mode `{other}` (expected exact|float)"))),
        }
    }
}

/// A field element: either an exact rational or a double.
pub trait Scalar:
    Num + NumAssignRef + Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    const MODE: Mode;

    fn from_i64(v: i64) -> Self;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn from_rational(q: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// `e^self`, or `None` when the value is not representable in this mode.
    fn exp(&self) -> Option<Self>;

    /// Zero test. Exact mode: literal zero. Float mode: `|x| <= tol * max(1, scale)`.
    fn is_negligible(&self, tol: f64, scale: f64) -> bool;

    fn near_zero(&self, scale: f64) -> bool {
        self.is_negligible(FLOAT_ZERO_TOL, scale)
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// Integer numerators over one shared denominator, when the field has
    /// them. Lets jet products run on integers and normalise once.
    fn split_common(_xs: &[Self]) -> Option<(Vec<BigInt>, BigInt)> {
        None
    }

    fn join_common(_nums: Vec<BigInt>, _den: &BigInt) -> Vec<Self> {
        unreachable!("join_common is only called after split_common succeeds")
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn exp(&self) -> Option<Self> {
        self.is_zero().then(Rational::one)
    }

    fn is_negligible(&self, _tol: f64, _scale: f64) -> bool {
        self.is_zero()
    }

    fn split_common(xs: &[Self]) -> Option<(Vec<BigInt>, BigInt)> {
        use num::Integer;
        let den = xs.iter().fold(BigInt::one(), |l, x| if x.denom().is_one() { l } else { l.lcm(x.denom()) });
        let nums = xs
            .iter()
            .map(|x| if x.is_zero() { BigInt::zero() } else { x.numer() * (&den / x.denom()) })
            .collect();
        Some((nums, den))
    }

    fn join_common(nums: Vec<BigInt>, den: &BigInt) -> Vec<Self> {
        nums.into_iter()
            .map(|n| if n.is_zero() { Rational::zero() } else { Rational::new(n, den.clone()) })
            .collect()
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }

    fn is_negligible(&self, tol: f64, scale: f64) -> bool {
        self.abs() <= tol * scale.max(1.0)
    }
}

/// Parses `"3/4"`, `"-2"`, `"0.125"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    if !all.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = Rational::from_integer(BigInt::from_str_radix(&all, 10).map_err(|_| bad())?);
    let shift = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    for _ in 0..shift.unsigned_abs() {
        value = if shift > 0 { value * ten.clone() } else { value / ten.clone() };
    }
    Ok(if negative { -value } else { value })
}

/// Renders a rational as `"p/q"` (or `"p"` for integers).
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Exact rational equal to the given double (every finite double is dyadic).
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}
