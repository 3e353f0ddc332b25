//! Serde adapters for floats that may be infinite or NaN. Finite values stay
//! plain JSON numbers; the rest become the strings `"inf"`, `"-inf"` and
//! `"nan"`, so documents round-trip exactly.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `f64` wrapper carrying the extended encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtF64(pub f64);

impl Serialize for ExtF64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else if v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }
}

impl<'de> Deserialize<'de> for ExtF64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtF64(v)),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(ExtF64(f64::INFINITY)),
                "-inf" => Ok(ExtF64(f64::NEG_INFINITY)),
                "nan" => Ok(ExtF64(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("bad number {other:?}"))),
            },
        }
    }
}

pub(crate) mod ext_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        ExtF64(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(ExtF64::deserialize(d)?.0)
    }
}

pub(crate) mod ext_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(ExtF64).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<ExtF64>::deserialize(d)?.map(|v| v.0))
    }
}

pub(crate) mod ext_pair {
    use super::*;

    pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (ExtF64(v.0), ExtF64(v.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(ExtF64, ExtF64)>::deserialize(d)?;
        Ok((a.0, b.0))
    }
}

pub(crate) mod ext_pairs {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|p| (ExtF64(p.0), ExtF64(p.1))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(f64, f64)>, D::Error> {
        let v = Vec::<(ExtF64, ExtF64)>::deserialize(d)?;
        Ok(v.into_iter().map(|(a, b)| (a.0, b.0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_values_round_trip() {
        for v in [0.1, -3.0, f64::INFINITY, f64::NEG_INFINITY, 1e-300] {
            let s = serde_json::to_string(&ExtF64(v)).unwrap();
            assert_eq!(serde_json::from_str::<ExtF64>(&s).unwrap(), ExtF64(v));
        }
        assert_eq!(serde_json::to_string(&ExtF64(f64::NEG_INFINITY)).unwrap(), "\"-inf\"");
        assert!(serde_json::from_str::<ExtF64>("\"nan\"").unwrap().0.is_nan());
        assert!(serde_json::from_str::<ExtF64>("\"big\"").is_err());
    }
}
