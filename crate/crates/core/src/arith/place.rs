use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An absolute value of ℚ: the archimedean place or a prime.
///
/// Every place of ℚ has local degree 1; [`Place::local_degree`] is kept so
/// that global sums are written as `Σ n_v λ_v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinite,
    Prime(u64),
}

impl Place {
    /// Checked constructor for a finite place.
    pub fn prime(p: u64) -> Result<Self> {
        if num_prime::nt_funcs::is_prime64(p) {
            Ok(Place::Prime(p))
        } else {
            Err(Error::Domain(format!("{p} is not prime")))
        }
    }

    pub fn local_degree(&self) -> u32 {
        1
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Infinite)
    }

    pub fn as_prime(&self) -> Option<u64> {
        match self {
            Place::Infinite => None,
            Place::Prime(p) => Some(*p),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => f.write_str("inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "inf" {
            return Ok(Place::Infinite);
        }
        let p: u64 = t.parse().map_err(|_| Error::parse(s, 0, "expected \"inf\" or a prime"))?;
        Place::prime(p)
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
