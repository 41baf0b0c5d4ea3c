//! Exact rationals and their `"p/q"` text encoding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or a decimal-free integer. Denominator must be nonzero.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Lowest terms, positive denominator; integers print without a denominator.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 gives up on huge operands; fall back to scaled division.
        let shift = (x.numer().bits() as i64 - x.denom().bits() as i64).clamp(-1000, 1000);
        let scaled = if shift >= 0 {
            x / Q::from_integer(BigInt::one() << shift as usize)
        } else {
            x * Q::from_integer(BigInt::one() << (-shift) as usize)
        };
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(Q::zero)
}

/// Representative of `x` modulo 1 in `[0, 1)`.
pub fn mod_one(x: &Q) -> Q {
    x - Q::from_integer(x.floor().to_integer())
}

/// Distance from `x` to the nearest integer.
pub fn circle_dist(x: &Q) -> Q {
    let r = mod_one(x);
    let other = Q::one() - &r;
    if r < other {
        r
    } else {
        other
    }
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

/// Serde adapters that read rationals from `"p/q"` strings or JSON integers and
/// always write strings.
pub mod serde_q {
    use super::*;
    use serde::de::{self, Deserializer, Visitor};
    use serde::ser::{SerializeSeq, Serializer};
    use serde::Deserialize;
    use std::fmt;

    struct QVisitor;

    impl<'de> Visitor<'de> for QVisitor {
        type Value = Q;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as \"p/q\" or an integer")
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Q, E> {
            parse_q(v).map_err(E::custom)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Q, E> {
            Ok(q(v))
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Q, E> {
            Ok(Q::from_integer(BigInt::from(v)))
        }
    }

    #[derive(Deserialize)]
    #[serde(transparent)]
    struct Wrapped(#[serde(deserialize_with = "deserialize")] Q);

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        d.deserialize_any(QVisitor)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&fmt_q(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Q>, D::Error> {
            let v: Vec<Wrapped> = Vec::deserialize(d)?;
            Ok(v.into_iter().map(|w| w.0).collect())
        }
    }

    pub mod vec_vec {
        use super::*;

        pub fn serialize<S: Serializer>(
            rows: &[Vec<Q>],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let strs: Vec<Vec<String>> = rows
                .iter()
                .map(|r| r.iter().map(fmt_q).collect())
                .collect();
            serde::Serialize::serialize(&strs, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Vec<Q>>, D::Error> {
            let v: Vec<Vec<Wrapped>> = Vec::deserialize(d)?;
            Ok(v
                .into_iter()
                .map(|r| r.into_iter().map(|w| w.0).collect())
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("6/-4").unwrap(), frac(-3, 2));
        assert_eq!(fmt_q(&frac(-3, 2)), "-3/2");
        assert_eq!(fmt_q(&frac(4, 2)), "2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("0.5").is_err());
    }

    #[test]
    fn mod_one_is_in_unit_interval() {
        assert_eq!(mod_one(&frac(-1, 3)), frac(2, 3));
        assert_eq!(mod_one(&frac(7, 2)), frac(1, 2));
        assert_eq!(circle_dist(&frac(9, 10)), frac(1, 10));
    }

    #[test]
    fn huge_ratio_to_float() {
        let big = Q::from_integer(BigInt::from(10).pow(400)) / Q::from_integer(BigInt::from(10).pow(398));
        assert!((to_f64(&big) - 100.0).abs() < 1e-9);
    }
}
