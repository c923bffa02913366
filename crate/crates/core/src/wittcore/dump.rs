use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{pfold_decomposition, pfold_max_len, ConventionAudit, WittCtx, WittError};
use crate::exactpoly::MPoly;

/// Sha-256 of a byte string, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeAudit {
    pub ell: usize,
    pub f_min_degree: String,
    pub h_min_degree: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PFoldDump {
    pub f: Vec<MPoly>,
    /// `h[k]` belongs to component `k + 2`.
    pub h: Vec<MPoly>,
    pub convention: String,
    pub passing_conventions: Vec<String>,
    pub convention_audits: Vec<ConventionAudit>,
}

/// Serializable tables for `(p, n)`, hashed over the JSON of every other field.
#[derive(Clone, Debug, Serialize)]
pub struct WittDump {
    pub p: u64,
    pub n: usize,
    pub layout: String,
    pub ghost: Vec<MPoly>,
    pub addition: Vec<MPoly>,
    pub negation: Vec<MPoly>,
    pub pfold: Option<PFoldDump>,
    pub degree_audit: Vec<DegreeAudit>,
    pub content_hash: String,
}

impl WittDump {
    /// Generates everything available for `(p, n)`; the p-fold part is
    /// included when `n` is inside its (smaller) range.
    pub fn generate(p: u64, n: usize) -> Result<WittDump, WittError> {
        let ctx = WittCtx::new(p, n)?;
        let (pfold, degree_audit) = if n <= pfold_max_len(p) {
            let d = pfold_decomposition(p, n)?;
            let audit = (1..=n)
                .map(|ell| DegreeAudit {
                    ell,
                    f_min_degree: d.min_degree_f(ell).to_string(),
                    h_min_degree: (ell >= 2).then(|| d.min_degree_h(ell).to_string()),
                })
                .collect();
            let dump = PFoldDump {
                f: (1..=n).map(|ell| d.f(ell).clone()).collect(),
                h: (2..=n).map(|ell| d.h(ell).clone()).collect(),
                convention: d.convention().name().to_string(),
                passing_conventions: d
                    .passing_conventions()
                    .iter()
                    .map(|c| c.name().to_string())
                    .collect(),
                convention_audits: d.audits().to_vec(),
            };
            (Some(dump), audit)
        } else {
            (None, Vec::new())
        };
        let mut dump = WittDump {
            p,
            n,
            layout: "binary: X_j -> 2j-2, Y_j -> 2j-1; p-fold: x_ij -> (j-1)p + (i-1)".into(),
            ghost: ctx.ghost_polys().to_vec(),
            addition: ctx.addition_polys().to_vec(),
            negation: ctx.negation_polys().to_vec(),
            pfold,
            degree_audit,
            content_hash: String::new(),
        };
        let body = serde_json::to_vec(&dump).expect("serializable");
        dump.content_hash = content_hash(&body);
        Ok(dump)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        let a = WittDump::generate(2, 3).unwrap();
        let b = WittDump::generate(2, 3).unwrap();
        assert_eq!(a.content_hash, b.content_hash);
        assert_eq!(a.to_json_pretty(), b.to_json_pretty());
        let c = WittDump::generate(3, 2).unwrap();
        assert_ne!(a.content_hash, c.content_hash);
    }

    #[test]
    fn large_n_has_no_pfold() {
        let d = WittDump::generate(2, 5).unwrap();
        assert!(d.pfold.is_none());
        assert_eq!(d.addition.len(), 5);
    }
}
