use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A non-negative half-integer angular momentum, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin(u32);

impl Spin {
    pub const ZERO: Spin = Spin(0);
    pub const HALF: Spin = Spin(1);

    pub const fn from_twice(twice: u32) -> Self {
        Spin(twice)
    }

    /// Parse a float such as `2.5`; rejects anything that is not a multiple of 1/2.
    pub fn from_f64(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !value.is_finite() || value < 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "{value} is not a non-negative half-integer"
            )));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub const fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// 2I + 1
    pub const fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// I(I+1)
    pub fn casimir(self) -> f64 {
        let i = self.value();
        i * (i + 1.0)
    }

    pub const fn is_half_integer(self) -> bool {
        self.0 % 2 == 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for Spin {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Spin {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Spin::from_f64(v).map_err(serde::de::Error::custom)
    }
}
