//! Tower description files:
//! `{"p": 2, "N": 16 | "auto", "E_K": [c0, ..], "E_L": [c0, ..], "seed": 7}`.
//! Coefficients are decimal strings (plain JSON integers are accepted too),
//! little-endian by degree. A coefficient of `E_L` may itself be a list,
//! read as an element of `O_K` in the basis `1, pi_K, ...`.

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::TowerInput;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecInt(pub BigInt);

impl Serialize for DecInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for DecInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => s
                .trim()
                .parse()
                .map(DecInt)
                .map_err(|_| D::Error::custom(format!("bad integer {s:?}"))),
            Raw::I(i) => Ok(DecInt(BigInt::from(i))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Int(DecInt),
    Poly(Vec<DecInt>),
}

impl Coef {
    fn to_vec(&self) -> Vec<BigInt> {
        match self {
            Coef::Int(c) => vec![c.0.clone()],
            Coef::Poly(cs) => cs.iter().map(|c| c.0.clone()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionSpec {
    Auto,
    Digits(u32),
}

impl Serialize for PrecisionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PrecisionSpec::Auto => s.serialize_str("auto"),
            PrecisionSpec::Digits(n) => s.serialize_u32(*n),
        }
    }
}

impl<'de> Deserialize<'de> for PrecisionSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(u32),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) if s == "auto" => Ok(PrecisionSpec::Auto),
            Raw::S(s) => s
                .parse()
                .map(PrecisionSpec::Digits)
                .map_err(|_| D::Error::custom(format!("bad precision {s:?}"))),
            Raw::I(n) => Ok(PrecisionSpec::Digits(n)),
        }
    }
}

impl std::str::FromStr for PrecisionSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            Ok(PrecisionSpec::Auto)
        } else {
            s.parse().map(PrecisionSpec::Digits).map_err(|_| format!("bad precision {s:?}"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub p: u64,
    #[serde(rename = "N", default = "auto")]
    pub precision: PrecisionSpec,
    #[serde(rename = "E_K", default, skip_serializing_if = "Option::is_none")]
    pub e_k: Option<Vec<DecInt>>,
    #[serde(rename = "E_L")]
    pub e_l: Vec<Coef>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn auto() -> PrecisionSpec {
    PrecisionSpec::Auto
}

impl TowerSpec {
    pub fn from_json(text: &str) -> Result<TowerSpec, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn input(&self) -> TowerInput {
        TowerInput {
            p: self.p,
            e_k: self.e_k.as_ref().map(|cs| cs.iter().map(|c| c.0.clone()).collect()),
            e_l: self.e_l.iter().map(Coef::to_vec).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let s = TowerSpec::from_json(r#"{"p":2,"N":"auto","E_L":["2","-2","1"],"seed":7}"#).unwrap();
        assert_eq!(s.precision, PrecisionSpec::Auto);
        assert_eq!(s.input().e_l, vec![vec![BigInt::from(2)], vec![BigInt::from(-2)], vec![BigInt::from(1)]]);
        let t = TowerSpec::from_json(
            r#"{"p":2,"N":12,"E_K":["-2",0,"1"],"E_L":[["2","-1"],["-2","1"],"1"]}"#,
        )
        .unwrap();
        assert_eq!(t.precision, PrecisionSpec::Digits(12));
        assert_eq!(t.input().e_l[0], vec![BigInt::from(2), BigInt::from(-1)]);
        assert!(TowerSpec::from_json(r#"{"p":2,"E_L":["x"]}"#).is_err());
    }
}
