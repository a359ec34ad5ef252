//! Exact rational values in reports.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A rational serialized as `{"numerator", "denominator", "value"}`.
///
/// Numerator and denominator are JSON integers when they fit in 64 bits
/// and decimal strings otherwise; `value` is the nearest `f64`, for
/// reading only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactRational(pub BigRational);

impl ExactRational {
    pub fn value(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        Self(r)
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// A finite, non-negative `f64` as an exact rational.
pub fn from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn abs_diff(a: &BigRational, b: &BigRational) -> BigRational {
    let d = a - b;
    if d < BigRational::zero() {
        -d
    } else {
        d
    }
}

fn int_json(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(i) => serde_json::Value::from(i),
        None => serde_json::Value::from(v.to_string()),
    }
}

fn int_from_json(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from)),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    numerator: serde_json::Value,
    denominator: serde_json::Value,
    #[serde(default)]
    value: Option<f64>,
}

impl Serialize for ExactRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Wire {
            numerator: int_json(self.0.numer()),
            denominator: int_json(self.0.denom()),
            value: Some(self.value()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let num =
            int_from_json(&w.numerator).ok_or_else(|| serde::de::Error::custom("bad numerator"))?;
        let den = int_from_json(&w.denominator)
            .ok_or_else(|| serde::de::Error::custom("bad denominator"))?;
        if den.is_zero() {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Self(BigRational::new(num, den)))
    }
}
