//! Coefficient arithmetic: binary64 floats or exact rationals.
//!
//! Count-based quantities (set sizes, boundary sizes, densities) are always
//! exact rationals; the `Scalar` abstraction only covers chain coefficients
//! and derived sums, so pipelines can run in float mode for speed or in
//! exact mode for the acceptance checks.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Equality slack used by float mode. Exact mode ignores it.
pub const FLOAT_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Zero
    + One
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact (no tolerance anywhere).
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;

    /// Exact ratio of two integers (denominator nonzero).
    fn from_ratio(num: i64, den: u64) -> Self;

    fn to_f64(&self) -> f64;

    /// JSON form: floats as numbers, rationals as "p/q" strings.
    fn to_json(&self) -> serde_json::Value;

    /// Accepts integers in both modes, JSON floats in float mode, and
    /// "p/q" strings in both (float mode divides).
    fn from_json(v: &serde_json::Value) -> crate::error::Result<Self>;

    /// Equality up to the documented float tolerance; exact equality in exact mode.
    fn approx_eq(&self, other: &Self) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.clone() - other.clone()).abs().to_f64() <= FLOAT_TOL
        }
    }

    /// Coefficients this small are pruned from chain supports.
    fn is_negligible(&self) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.abs().to_f64() <= FLOAT_TOL
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(*self)
    }

    fn from_json(v: &serde_json::Value) -> crate::error::Result<Self> {
        use crate::error::Error;
        if let Some(x) = v.as_f64() {
            return Ok(x);
        }
        if let Some(s) = v.as_str() {
            if let Some((p, q)) = parse_fraction_str(s) {
                return Ok(p as f64 / q as f64);
            }
        }
        Err(Error::Invalid(format!("not a float value: {v}")))
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Fall back through a reduced float division for huge terms.
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn to_json(&self) -> serde_json::Value {
        if self.is_integer() {
            if let Some(n) = ToPrimitive::to_i64(&self.to_integer()) {
                return serde_json::json!(n);
            }
        }
        serde_json::json!(format!("{}/{}", self.numer(), self.denom()))
    }

    fn from_json(v: &serde_json::Value) -> crate::error::Result<Self> {
        use crate::error::Error;
        if let Some(n) = v.as_i64() {
            return Ok(<Self as Scalar>::from_i64(n));
        }
        if let Some(s) = v.as_str() {
            if let Some((p, q)) = parse_fraction_str(s) {
                return Ok(BigRational::new(BigInt::from(p), BigInt::from(q)));
            }
        }
        Err(Error::Invalid(format!(
            "exact mode accepts integers or \"p/q\" strings, got {v}"
        )))
    }
}

/// "p/q" or a plain integer string.
fn parse_fraction_str(s: &str) -> Option<(i64, i64)> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p = p.trim().parse::<i64>().ok()?;
            let q = q.trim().parse::<i64>().ok()?;
            if q <= 0 {
                None
            } else {
                Some((p, q))
            }
        }
        None => s.trim().parse::<i64>().ok().map(|p| (p, 1)),
    }
}

/// Exact ratio of two counts as a `BigRational`.
pub fn count_ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact signed ratio.
pub fn int_ratio(num: i64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn big_ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// Render a scalar for CSV output: floats use the shortest round-trip form,
/// rationals are formatted as decimal via f64 (values themselves stay exact
/// inside the structures).
pub fn csv_value<S: Scalar>(v: &S) -> String {
    format!("{}", v.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_ratio_is_exact() {
        let a = BigRational::from_ratio(2, 6);
        let b = BigRational::from_ratio(1, 3);
        assert_eq!(a, b);
        assert!(BigRational::EXACT);
    }

    #[test]
    fn float_tolerance_matches_contract() {
        let a = 0.1f64 + 0.2;
        let b = 0.3f64;
        assert!(a.approx_eq(&b));
        assert!(!(0.3f64).approx_eq(&0.300001));
    }

    #[test]
    fn json_round_trip() {
        let r = BigRational::from_ratio(-3, 7);
        assert_eq!(BigRational::from_json(&r.to_json()).unwrap(), r);
        assert_eq!(BigRational::from_i64(42).to_json(), serde_json::json!(42));
        assert_eq!(f64::from_json(&(0.25f64).to_json()).unwrap(), 0.25);
        assert_eq!(f64::from_json(&serde_json::json!("1/4")).unwrap(), 0.25);
        assert!(BigRational::from_json(&serde_json::json!(0.5)).is_err());
    }

    #[test]
    fn negligible_pruning() {
        assert!((0.0f64).is_negligible());
        assert!((1e-13f64).is_negligible());
        assert!(!(1e-9f64).is_negligible());
        assert!(BigRational::zero().is_negligible());
        assert!(!BigRational::from_ratio(1, 1_000_000_000).is_negligible());
    }
}
