//! Bit-exact f64 serialization as C99-style hex-float strings.
//!
//! Reports and geometry files must round-trip floats exactly; decimal
//! shortest-repr would too, but hex floats make the bit pattern auditable.
//! Grammar emitted: `-?0x1.<13 hex>p<±exp>` for normals, `-?0x0p+0` for
//! zeros, `-?0x0.<13 hex>p-1022` for subnormals, plus `inf`/`-inf`/`nan`.

use crate::error::{Error, Result};

const FRAC_MASK: u64 = (1u64 << 52) - 1;

pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x < 0.0 { "-inf" } else { "inf" }.to_string();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_raw = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & FRAC_MASK;
    if exp_raw == 0 {
        if frac == 0 {
            return format!("{sign}0x0p+0");
        }
        return format!("{sign}0x0.{frac:013x}p-1022");
    }
    let exp = exp_raw - 1023;
    let esign = if exp < 0 { "-" } else { "+" };
    format!("{sign}0x1.{frac:013x}p{esign}{}", exp.abs())
}

pub fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "nan" => return Ok(f64::NAN),
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let bad = || Error::Parse(format!("malformed hex float: {s:?}"));
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x").ok_or_else(bad)?;
    let (mantissa, exp_str) = rest.split_once('p').ok_or_else(bad)?;
    let sign_bit = if neg { 1u64 << 63 } else { 0 };

    if mantissa == "0" {
        if exp_str != "+0" {
            return Err(bad());
        }
        return Ok(f64::from_bits(sign_bit));
    }
    let (lead, frac_str) = mantissa.split_once('.').ok_or_else(bad)?;
    if frac_str.len() != 13 {
        return Err(bad());
    }
    let frac = u64::from_str_radix(frac_str, 16).map_err(|_| bad())?;
    match lead {
        "1" => {
            let exp: i64 = parse_signed_exp(exp_str).ok_or_else(bad)?;
            if !(-1022..=1023).contains(&exp) {
                return Err(bad());
            }
            let exp_raw = (exp + 1023) as u64;
            Ok(f64::from_bits(sign_bit | (exp_raw << 52) | frac))
        }
        "0" => {
            if exp_str != "-1022" || frac == 0 {
                return Err(bad());
            }
            Ok(f64::from_bits(sign_bit | frac))
        }
        _ => Err(bad()),
    }
}

fn parse_signed_exp(s: &str) -> Option<i64> {
    let (neg, digits) = match s.as_bytes().first()? {
        b'+' => (false, &s[1..]),
        b'-' => (true, &s[1..]),
        _ => return None,
    };
    let v: i64 = digits.parse().ok()?;
    Some(if neg { -v } else { v })
}

/// Serde adapter for a single `f64` field: `#[serde(with = "hexfloat::serde_f64")]`.
pub mod serde_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&super::format_f64(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        let s = String::deserialize(de)?;
        super::parse_f64(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Option<f64>` fields.
pub mod serde_opt_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, ser: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => ser.serialize_some(&super::format_f64(*v)),
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<f64>, D::Error> {
        let s: Option<String> = Option::deserialize(de)?;
        s.map(|s| super::parse_f64(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Serde adapter for `Vec<f64>` fields.
pub mod serde_vec_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[f64], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(xs.iter().map(|x| super::format_f64(*x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<f64>, D::Error> {
        let strs: Vec<String> = Vec::deserialize(de)?;
        strs.iter()
            .map(|s| super::parse_f64(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_special_values() {
        for &x in &[
            0.0_f64,
            -0.0,
            1.0,
            -1.0,
            std::f64::consts::PI,
            f64::MIN_POSITIVE,
            f64::MIN_POSITIVE / 2.0, // subnormal
            5e-324,                  // min subnormal
            f64::MAX,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ] {
            let s = format_f64(x);
            let back = parse_f64(&s).unwrap();
            assert_eq!(x.to_bits(), back.to_bits(), "{s}");
        }
        assert!(parse_f64(&format_f64(f64::NAN)).unwrap().is_nan());
    }

    #[test]
    fn known_encodings() {
        assert_eq!(format_f64(1.0), "0x1.0000000000000p+0");
        assert_eq!(format_f64(-2.0), "-0x1.0000000000000p+1");
        assert_eq!(format_f64(0.5), "0x1.0000000000000p-1");
        assert_eq!(format_f64(0.0), "0x0p+0");
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "0x", "0x1.fp+0", "1.0", "0x1.0000000000000q+0"] {
            assert!(parse_f64(s).is_err(), "{s:?}");
        }
    }
}
