use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Number type for points, thresholds and interval endpoints.
///
/// Implemented for `f64`, [`Rational64`] and [`BigRational`]. Threshold
/// comparisons are only tie-exact for the rational types.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    fn from_int(value: i64) -> Self;

    /// Converts an exact rational, or `None` if it does not fit.
    fn from_rational(value: &BigRational) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// `|self - other|`.
    #[inline]
    fn dist(&self, other: &Self) -> Self {
        if self >= other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        }
    }
}

impl Scalar for f64 {
    fn from_int(value: i64) -> Self {
        value as f64
    }

    fn from_rational(value: &BigRational) -> Option<Self> {
        ToPrimitive::to_f64(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    #[inline]
    fn dist(&self, other: &Self) -> Self {
        (self - other).abs()
    }
}

impl Scalar for Rational64 {
    fn from_int(value: i64) -> Self {
        Rational64::from_integer(value)
    }

    fn from_rational(value: &BigRational) -> Option<Self> {
        Some(Rational64::new(value.numer().to_i64()?, value.denom().to_i64()?))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for BigRational {
    fn from_int(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn from_rational(value: &BigRational) -> Option<Self> {
        Some(value.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn dist(&self, other: &Self) -> Self {
        (self - other).abs()
    }
}

/// Parses `"3/4"`, `"-2"`, `"0.125"` or `"1e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let err = || Error::ParseRational(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str_radix(&all_digits, 10).map_err(|_| err())?);
    let shift = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if negative { -value } else { value })
}

/// Formats as `"num/den"`, or just `"num"` for integers.
pub fn format_rational(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}
