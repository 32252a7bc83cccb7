//! Decimal-string encoding of doubles with 17 significant digits, enough to
//! round-trip every finite `f64` exactly.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

/// `x` in scientific notation with 17 significant digits, e.g. `7.8539816339744828e-1`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse17(s: &str) -> Result<f64, std::num::ParseFloatError> {
    s.trim().parse()
}

/// `#[serde(with = "numfmt::scalar")]` for a single `f64`.
pub mod scalar {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt17(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        parse17(&s).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "numfmt::vector")]` for `Vec<f64>`.
pub mod vector {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&fmt17(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse17(s).map_err(D::Error::custom))
            .collect()
    }
}
