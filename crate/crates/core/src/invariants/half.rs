use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact half-integer stored by its double.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInteger {
    doubled: i64,
}

impl HalfInteger {
    pub const ZERO: HalfInteger = HalfInteger { doubled: 0 };

    pub const fn from_doubled(doubled: i64) -> Self {
        HalfInteger { doubled }
    }

    pub const fn from_integer(n: i64) -> Self {
        HalfInteger { doubled: 2 * n }
    }

    /// `n / 2`.
    pub const fn half(n: i64) -> Self {
        HalfInteger { doubled: n }
    }

    pub const fn doubled(self) -> i64 {
        self.doubled
    }

    pub const fn is_integer(self) -> bool {
        self.doubled % 2 == 0
    }

    pub fn to_integer(self) -> Option<i64> {
        self.is_integer().then_some(self.doubled / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.doubled as f64 / 2.0
    }
}

impl From<i64> for HalfInteger {
    fn from(n: i64) -> Self {
        HalfInteger::from_integer(n)
    }
}

impl Add for HalfInteger {
    type Output = HalfInteger;
    fn add(self, rhs: Self) -> Self {
        HalfInteger::from_doubled(self.doubled + rhs.doubled)
    }
}

impl Sub for HalfInteger {
    type Output = HalfInteger;
    fn sub(self, rhs: Self) -> Self {
        HalfInteger::from_doubled(self.doubled - rhs.doubled)
    }
}

impl Neg for HalfInteger {
    type Output = HalfInteger;
    fn neg(self) -> Self {
        HalfInteger::from_doubled(-self.doubled)
    }
}

impl std::iter::Sum for HalfInteger {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(HalfInteger::ZERO, Add::add)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_integer() {
            Some(n) => write!(f, "{n}"),
            None => {
                let sign = if self.doubled < 0 { "-" } else { "" };
                write!(f, "{sign}{}.5", self.doubled.abs() / 2)
            }
        }
    }
}

// Serialized as a plain number: an integer when integral, `x.5` otherwise.
impl Serialize for HalfInteger {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.to_integer() {
            Some(n) => s.serialize_i64(n),
            None => s.serialize_f64(self.to_f64()),
        }
    }
}

impl<'de> Deserialize<'de> for HalfInteger {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        let doubled = 2.0 * x;
        if doubled.fract() != 0.0 || !doubled.is_finite() {
            return Err(serde::de::Error::custom(format!("{x} is not a half-integer")));
        }
        Ok(HalfInteger::from_doubled(doubled as i64))
    }
}
