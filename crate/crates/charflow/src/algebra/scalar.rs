//! The scalar abstraction shared by every layer that manipulates phase-space
//! data: exact rationals for certification, floats for numerics, and rational
//! functions of the independent variables for symbolic identity checks.
//!
//! All three implementations share one contract: ring operations never fail,
//! while division and negative powers return errors instead of panicking so
//! indeterminate expressions surface as diagnostics rather than crashes.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::laurent::Rat;
use super::ratfun::RationalFunction;

/// Common interface for the coefficient domains used throughout the crate.
///
/// `Rat` gives exact arithmetic, `f64` gives fast numerics, and
/// [`RationalFunction`] keeps the independent variables symbolic so identities
/// can be certified as algebraic zeros.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Embeds an exact rational constant into the scalar domain.
    fn from_rat(value: &Rat) -> Self;

    /// Division that reports a zero denominator instead of panicking.
    fn try_div(&self, rhs: &Self) -> Result<Self>;

    /// Multiplicative inverse with the same error contract as [`Scalar::try_div`].
    fn try_inv(&self) -> Result<Self> {
        Self::one().try_div(self)
    }

    /// Integer power; negative exponents of zero are reported as errors.
    fn powi_checked(&self, exp: i64) -> Result<Self> {
        if exp >= 0 {
            let mut acc = Self::one();
            let mut base = self.clone();
            let mut e = exp as u64;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * base.clone();
                }
                base = base.clone() * base;
                e >>= 1;
            }
            Ok(acc)
        } else {
            self.powi_checked(-exp)?.try_inv()
        }
    }

    /// Short human-readable form used in diagnostics.
    fn describe(&self) -> String {
        format!("{self:?}")
    }
}

impl Scalar for Rat {
    fn from_rat(value: &Rat) -> Self {
        value.clone()
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero(format!(
                "exact division of {} by zero",
                rat_to_string(self)
            )));
        }
        Ok(self / rhs)
    }

    fn describe(&self) -> String {
        rat_to_string(self)
    }
}

impl Scalar for f64 {
    fn from_rat(value: &Rat) -> Self {
        rat_to_f64(value)
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if *rhs == 0.0 {
            return Err(Error::DivisionByZero(format!(
                "float division of {self} by zero"
            )));
        }
        Ok(self / rhs)
    }

    fn powi_checked(&self, exp: i64) -> Result<Self> {
        if *self == 0.0 && exp < 0 {
            return Err(Error::DivisionByZero("0.0 raised to a negative power".into()));
        }
        Ok(self.powi(exp as i32))
    }

    fn describe(&self) -> String {
        format!("{self:.6e}")
    }
}

impl Scalar for RationalFunction {
    fn from_rat(value: &Rat) -> Self {
        RationalFunction::constant(value.clone())
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero(
                "rational-function division by the zero function".into(),
            ));
        }
        Ok(self.div_nonzero(rhs))
    }

    fn describe(&self) -> String {
        format!("{self}")
    }
}

/// Converts an exact rational to the nearest `f64`, going through big-integer
/// parts so denominators outside the `i64` range still convert.
pub fn rat_to_f64(value: &Rat) -> f64 {
    if let Some(x) = value.to_f64() {
        return x;
    }
    // Fall back to a quotient of approximations for extreme magnitudes.
    let n = big_to_f64(value.numer());
    let d = big_to_f64(value.denom());
    n / d
}

fn big_to_f64(value: &BigInt) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        if value.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Parses `"p/q"` or `"p"` into an exact rational, rejecting zero denominators.
pub fn rat_from_str(text: &str) -> Result<Rat> {
    let text = text.trim();
    let parse_int = |s: &str| -> Result<BigInt> {
        BigInt::from_str(s.trim())
            .map_err(|e| Error::Parse(format!("invalid integer {s:?}: {e}")))
    };
    match text.split_once('/') {
        Some((n, d)) => {
            let numer = parse_int(n)?;
            let denom = parse_int(d)?;
            if denom.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            Ok(Rat::new(numer, denom))
        }
        None => Ok(Rat::from_integer(parse_int(text)?)),
    }
}

/// Renders an exact rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn rat_to_string(value: &Rat) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}
