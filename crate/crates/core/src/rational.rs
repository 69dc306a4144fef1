//! Exact rationals and their text encoding.
//!
//! Everything downstream of ingestion is exact. Floats only enter through
//! [`rationalize`], which picks the best approximation under a denominator
//! bound.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Default denominator bound for float ingestion.
pub const DEFAULT_DENOMINATOR_BOUND: u64 = 1_000_000;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Q::new(n, d))
        }
        None => BigInt::from_str(s).map(Q::from_integer).map_err(|_| bad()),
    }
}

/// Canonical text form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation of `x` with denominator at most `max_den`.
///
/// Walks the continued-fraction convergents and finishes with the best
/// semiconvergent, so the error is at most `1 / max_den`.
pub fn rationalize(x: f64, max_den: u64) -> Result<Q> {
    if !x.is_finite() {
        return Err(Error::Parse(format!("cannot rationalize {x}")));
    }
    let max_den = max_den.max(1);
    let negative = x < 0.0;
    let target = x.abs();

    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut rest = target;
    loop {
        let a = rest.floor();
        if a > 1e18 {
            break;
        }
        let a = a as u128;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_den as u128 {
            // largest admissible semiconvergent
            let k = (max_den as u128 - q0) / q1;
            let ps = k * p1 + p0;
            let qs = k * q1 + q0;
            let conv = p1 as f64 / q1 as f64;
            let semi = ps as f64 / qs as f64;
            if (semi - target).abs() < (conv - target).abs() {
                p1 = ps;
                q1 = qs;
            }
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let f = rest - a as f64;
        if f < 1e-15 {
            break;
        }
        rest = 1.0 / f;
    }
    let mut r = Q::new(BigInt::from(p1), BigInt::from(q1));
    if negative {
        r = -r;
    }
    Ok(r)
}

/// Serde adapter accepting `"p/q"` strings or JSON integers and emitting strings.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(pub Q);

impl From<Q> for Rat {
    fn from(x: Q) -> Self {
        Rat(x)
    }
}

impl From<Rat> for Q {
    fn from(r: Rat) -> Self {
        r.0
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(&self.0))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RatVisitor;

        impl<'de> Visitor<'de> for RatVisitor {
            type Value = Rat;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a \"p/q\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rat, E> {
                Ok(Rat(q(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rat, E> {
                Ok(Rat(Q::from_integer(BigInt::from(v))))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rat, E> {
                Err(E::custom(format!(
                    "float {v} is not exact; encode it as a \"p/q\" string"
                )))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rat, E> {
                parse(v).map(Rat).map_err(E::custom)
            }
        }

        d.deserialize_any(RatVisitor)
    }
}

/// `serialize_with` helpers for report fields holding exact values.
pub mod ser {
    use serde::ser::{SerializeMap, SerializeSeq};
    use serde::Serializer;
    use std::collections::BTreeMap;

    use super::{format, Q};

    pub fn q<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(x))
    }

    pub fn opt<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&format(x)),
            None => s.serialize_none(),
        }
    }

    pub fn vec<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&format(x))?;
        }
        seq.end()
    }

    pub fn opt_vec<S: Serializer>(v: &Option<Vec<Q>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => vec(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn mat<S: Serializer>(m: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(format).collect()).collect();
        let mut seq = s.serialize_seq(Some(rows.len()))?;
        for r in &rows {
            seq.serialize_element(r)?;
        }
        seq.end()
    }

    pub fn map<S: Serializer, K: serde::Serialize>(
        m: &BTreeMap<K, Q>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let mut out = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            out.serialize_entry(k, &format(v))?;
        }
        out.end()
    }
}

pub fn rats(v: &[Q]) -> Vec<Rat> {
    v.iter().cloned().map(Rat).collect()
}

pub fn unrats(v: Vec<Rat>) -> Vec<Q> {
    v.into_iter().map(|r| r.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("6/4").unwrap(), frac(3, 2));
        assert_eq!(parse(" -2 ").unwrap(), q(-2));
        assert_eq!(format(&frac(-3, 6)), "-1/2");
        assert_eq!(format(&q(5)), "5");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.5, 1000).unwrap(), frac(1, 2));
        assert_eq!(rationalize(-0.75, 1000).unwrap(), frac(-3, 4));
        assert_eq!(rationalize(0.0, 1000).unwrap(), q(0));
        assert_eq!(rationalize(1.0, 1000).unwrap(), q(1));
        assert_eq!(
            rationalize(std::f64::consts::PI, 1000).unwrap(),
            frac(355, 113)
        );
    }

    #[test]
    fn rationalize_respects_bound_and_error() {
        for &x in &[std::f64::consts::SQRT_2 / 2.0, 1.0 / 5f64.sqrt(), 0.123456789] {
            let r = rationalize(x, DEFAULT_DENOMINATOR_BOUND).unwrap();
            assert!(r.denom() <= &BigInt::from(DEFAULT_DENOMINATOR_BOUND));
            assert!((to_f64(&r) - x).abs() <= 1e-6);
        }
    }

    #[test]
    fn serde_accepts_ints_and_strings() {
        let v: Vec<Rat> = serde_json::from_str(r#"[1, "2/4", "-3"]"#).unwrap();
        assert_eq!(unrats(v.clone()), vec![q(1), frac(1, 2), q(-3)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["1","1/2","-3"]"#);
        assert!(serde_json::from_str::<Rat>("0.5").is_err());
    }
}
