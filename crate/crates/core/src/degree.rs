//! Exact truth degrees.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational used for every degree, coefficient and bound.
pub type Rational = BigRational;

/// Shorthand for building a rational from machine integers.
///
/// Panics if `denom` is zero.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses a non-negative rational literal exactly.
///
/// Accepted forms are integers (`1`), decimals (`0.8`, `.5`, `1.`) and
/// fractions (`4/5`). Decimals never pass through binary floating point, so
/// `0.1` is exactly one tenth.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_digits(num.trim())?;
        let den = parse_digits(den.trim())?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let int = if int.is_empty() {
        BigInt::zero()
    } else {
        parse_digits(int)?
    };
    if frac.is_empty() {
        return Some(Rational::from_integer(int));
    }
    let frac_value = parse_digits(frac)?;
    let scale = num_traits::pow(BigInt::from(10u8), frac.len());
    Some(Rational::from_integer(int) + Rational::new(frac_value, scale))
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Formats a rational as a reduced fraction, or as an integer when the
/// denominator is one.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// A degree of truth: an exact rational in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TruthDegree(Rational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DegreeError {
    #[error("degree {0} is outside [0, 1]")]
    OutOfRange(String),
    #[error("`{0}` is not a rational literal")]
    Syntax(String),
}

impl TruthDegree {
    pub fn new(value: Rational) -> Result<Self, DegreeError> {
        if value.is_negative() || value > Rational::one() {
            return Err(DegreeError::OutOfRange(format_rational(&value)));
        }
        Ok(TruthDegree(value))
    }

    /// Clamps `value` into `[0, 1]`.
    pub fn saturating(value: Rational) -> Self {
        if value.is_negative() {
            Self::zero()
        } else if value > Rational::one() {
            Self::one()
        } else {
            TruthDegree(value)
        }
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self, DegreeError> {
        Self::new(rat(numer, denom))
    }

    pub fn zero() -> Self {
        TruthDegree(Rational::zero())
    }

    pub fn one() -> Self {
        TruthDegree(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_value(self) -> Rational {
        self.0
    }

    /// Łukasiewicz t-norm `max(0, a + b - 1)`.
    pub fn t_norm(&self, other: &Self) -> Self {
        Self::saturating(&self.0 + &other.0 - Rational::one())
    }

    /// Łukasiewicz t-conorm `min(1, a + b)`.
    pub fn t_conorm(&self, other: &Self) -> Self {
        Self::saturating(&self.0 + &other.0)
    }

    /// Łukasiewicz negation `1 - a`.
    pub fn negate(&self) -> Self {
        TruthDegree(Rational::one() - &self.0)
    }

    /// Łukasiewicz implication `min(1, 1 - a + b)`.
    pub fn implies(&self, other: &Self) -> Self {
        Self::saturating(Rational::one() - &self.0 + &other.0)
    }
}

impl fmt::Display for TruthDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl FromStr for TruthDegree {
    type Err = DegreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value = parse_rational(s).ok_or_else(|| DegreeError::Syntax(s.to_string()))?;
        Self::new(value)
    }
}

impl TryFrom<Rational> for TruthDegree {
    type Error = DegreeError;

    fn try_from(value: Rational) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<TruthDegree> for Rational {
    fn from(d: TruthDegree) -> Self {
        d.0
    }
}
