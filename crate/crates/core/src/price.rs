//! Fixed-point money.
//!
//! Every price, limit and surplus is an integer count of nano-units (1e-9).
//! Quotes live on a grid of two nano-units so the midpoint of any two quotes
//! is itself an exact nano-unit value; transaction prices therefore never
//! round and surplus conservation holds with integer equality.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const NANOS_PER_UNIT: i64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Price(i64);

impl Price {
    pub const ZERO: Price = Price(0);
    /// Spacing of the quote grid.
    pub const TICK: Price = Price(2);

    pub const fn from_nanos(nanos: i64) -> Price {
        Price(nanos)
    }

    pub const fn nanos(self) -> i64 {
        self.0
    }

    pub const fn from_units(units: i64) -> Price {
        Price(units * NANOS_PER_UNIT)
    }

    /// Nearest point on the quote grid.
    pub fn from_f64(x: f64) -> Price {
        assert!(x.is_finite(), "non-finite price {x}");
        let half_nanos = (x * (NANOS_PER_UNIT / 2) as f64).round() as i64;
        Price(half_nanos * 2)
    }

    /// Largest grid point not above `x`.
    pub fn floor_f64(x: f64) -> Price {
        assert!(x.is_finite(), "non-finite price {x}");
        let half_nanos = (x * (NANOS_PER_UNIT / 2) as f64).floor() as i64;
        Price(half_nanos * 2)
    }

    /// Smallest grid point not below `x`.
    pub fn ceil_f64(x: f64) -> Price {
        assert!(x.is_finite(), "non-finite price {x}");
        let half_nanos = (x * (NANOS_PER_UNIT / 2) as f64).ceil() as i64;
        Price(half_nanos * 2)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_UNIT as f64
    }

    pub fn is_on_grid(self) -> bool {
        self.0 % 2 == 0
    }

    /// Midpoint, exact whenever both arguments lie on the quote grid
    /// (otherwise rounded down to the nano-unit).
    pub fn midpoint(a: Price, b: Price) -> Price {
        Price((a.0 + b.0).div_euclid(2))
    }

    pub fn abs(self) -> Price {
        Price(self.0.abs())
    }
}

impl Add for Price {
    type Output = Price;
    fn add(self, rhs: Price) -> Price {
        Price(self.0 + rhs.0)
    }
}

impl Sub for Price {
    type Output = Price;
    fn sub(self, rhs: Price) -> Price {
        Price(self.0 - rhs.0)
    }
}

impl Neg for Price {
    type Output = Price;
    fn neg(self) -> Price {
        Price(-self.0)
    }
}

impl AddAssign for Price {
    fn add_assign(&mut self, rhs: Price) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Price {
    fn sub_assign(&mut self, rhs: Price) {
        self.0 -= rhs.0;
    }
}

impl Sum for Price {
    fn sum<I: Iterator<Item = Price>>(iter: I) -> Price {
        Price(iter.map(|p| p.0).sum())
    }
}

impl<'a> Sum<&'a Price> for Price {
    fn sum<I: Iterator<Item = &'a Price>>(iter: I) -> Price {
        iter.copied().sum()
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let units = abs / NANOS_PER_UNIT as u64;
        let frac = abs % NANOS_PER_UNIT as u64;
        write!(f, "{sign}{units}.{frac:09}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid price literal `{0}`")]
pub struct ParsePriceError(String);

impl FromStr for Price {
    type Err = ParsePriceError;

    fn from_str(s: &str) -> Result<Price, ParsePriceError> {
        let err = || ParsePriceError(s.to_string());
        let t = s.trim();
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if frac_part.len() > 9
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let units: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| err())? };
        let mut frac: i64 = 0;
        for (i, b) in frac_part.bytes().enumerate() {
            frac += (b - b'0') as i64 * 10_i64.pow(8 - i as u32);
        }
        let nanos = units.checked_mul(NANOS_PER_UNIT).and_then(|n| n.checked_add(frac)).ok_or_else(err)?;
        Ok(Price(if negative { -nanos } else { nanos }))
    }
}

impl Serialize for Price {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Price {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Price, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Float(f64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(Price::from_units(i)),
            Raw::Float(x) => Ok(Price::from_f64(x)),
        }
    }
}
