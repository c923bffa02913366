//! Wire format: a JSON array of `[coefficient, [[var, exp], ...]]` pairs in
//! ascending monomial order, coefficients as decimal strings.

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use super::{MPoly, Monomial, Var};

#[derive(Debug, Error)]
pub enum PolyJsonError {
    #[error("malformed polynomial JSON: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

type WireTerm = (String, Vec<(Var, u32)>);

impl MPoly {
    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self).expect("polynomial serialization is infallible")
    }

    pub fn from_json_value(v: &Value) -> Result<MPoly, PolyJsonError> {
        Ok(MPoly::deserialize(v)?)
    }
}

impl Serialize for MPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let wire: Vec<WireTerm> = self
            .terms()
            .map(|(m, c)| (c.to_str_radix(10), m.pairs().to_vec()))
            .collect();
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire: Vec<WireTerm> = Vec::deserialize(d)?;
        let mut terms = Vec::with_capacity(wire.len());
        for (c, pairs) in wire {
            let c: BigInt = c
                .parse()
                .map_err(|_| D::Error::custom(format!("bad coefficient {c:?}")))?;
            if pairs.iter().any(|&(_, e)| e == 0) {
                return Err(D::Error::custom("zero exponent in monomial"));
            }
            terms.push((Monomial::from_pairs(pairs), c));
        }
        Ok(MPoly::from_terms(terms))
    }
}
