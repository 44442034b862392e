//! Serde adapter writing `f64` as a decimal string with 17 significant
//! digits, enough to round-trip every double exactly.
//!
//! Use as `#[serde(with = "crate::numeric::sig17")]`.

use serde::{de::Error, Deserialize, Deserializer, Serializer};

pub fn format(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn parse(s: &str) -> Result<f64, std::num::ParseFloatError> {
    s.trim().parse()
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format(*x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).map_err(D::Error::custom)
}

/// The same encoding for a sequence, `#[serde(with = "crate::numeric::sig17::seq")]`.
pub mod seq {
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut out = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            out.serialize_element(&super::format(*x))?;
        }
        out.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| super::parse(s).map_err(D::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 4.506, 13.518, f64::MIN_POSITIVE, 1e-300, -7.1e22, 0.9999885] {
            let s = format(x);
            assert_eq!(parse(&s).unwrap().to_bits(), x.to_bits(), "{s}");
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17);
        }
        assert!(parse(&format(f64::INFINITY)).unwrap().is_infinite());
    }
}
