//! Rings of integers of a two-step totally ramified tower `Q_p ⊆ K ⊆ L`
//! with `L/K` cyclic of degree `p`, computed modulo `p^N`.
//!
//! Both levels are exact quotient rings (`O_K / p^N`, `O_L / p^N`), so ring
//! arithmetic carries no error; what is limited is how far valuations can be
//! decided, which [`ValExt`] makes explicit.

mod arith;
mod linsolve;
mod spec;
mod tower;
mod zpn;

use serde::Serialize;
use thiserror::Error;

pub use linsolve::{linsolve, Mat, NoSolution, Smith, Solution};
pub use spec::{Coef, PrecisionSpec, TowerSpec};
pub use tower::{
    auto_precision, BaseRing, BuildOptions, TopRing, Tower, TowerInput, TraceSolution,
};
pub use zpn::{Zpn, MAX_MODULUS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LfError {
    #[error("{which} polynomial is not Eisenstein: {reason}")]
    NotEisenstein { which: &'static str, reason: String },
    #[error("extension is not normal: found {found} of {expected} roots at precision")]
    NotNormal { found: usize, expected: usize },
    #[error("precision too low: valuation cap {val_cap} is below the required {needed}")]
    PrecisionTooLow { val_cap: u64, needed: u64 },
    #[error("trace does not land in the base ring at precision")]
    TraceNotRational,
    #[error("no solution at precision (obstruction at digit depth {depth})")]
    NoSolutionAtPrecision { depth: u32 },
    #[error("valuation bound {bound} exceeds the cap {cap}")]
    BoundRefused { bound: u64, cap: u64 },
    #[error("inconsistent tower data: {0}")]
    Inconsistent(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl From<NoSolution> for LfError {
    fn from(e: NoSolution) -> Self {
        LfError::NoSolutionAtPrecision { depth: e.depth }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Level {
    Base,
    Top,
}

/// An element of `O_K` or `O_L` as flat residues modulo `p^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OElem {
    level: Level,
    coeffs: Vec<u64>,
}

impl OElem {
    pub(crate) fn new(level: Level, coeffs: Vec<u64>) -> OElem {
        OElem { level, coeffs }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    /// Flat coefficients; for the top level index `j*e_K + k` is the
    /// coefficient of `pi_L^j pi_K^k`.
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// A valuation known exactly, or only known to be at least the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ValExt {
    Finite(u64),
    AtLeastCap(u64),
}

impl ValExt {
    pub fn finite(self) -> Option<u64> {
        match self {
            ValExt::Finite(v) => Some(v),
            ValExt::AtLeastCap(_) => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ValExt::Finite(_))
    }

    /// Decides `self >= t`; refuses when the answer is beyond the cap.
    pub fn at_least(self, t: u64) -> Result<bool, LfError> {
        match self {
            ValExt::Finite(v) => Ok(v >= t),
            ValExt::AtLeastCap(cap) if t <= cap => Ok(true),
            ValExt::AtLeastCap(cap) => Err(LfError::BoundRefused { bound: t, cap }),
        }
    }

    /// The finite value, or the cap as a lower bound.
    pub fn lower_bound(self) -> u64 {
        match self {
            ValExt::Finite(v) | ValExt::AtLeastCap(v) => v,
        }
    }
}

impl std::fmt::Display for ValExt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValExt::Finite(v) => write!(f, "{v}"),
            ValExt::AtLeastCap(c) => write!(f, ">={c}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_semantics() {
        assert_eq!(ValExt::Finite(3).at_least(3), Ok(true));
        assert_eq!(ValExt::Finite(3).at_least(4), Ok(false));
        assert_eq!(ValExt::AtLeastCap(10).at_least(10), Ok(true));
        assert!(ValExt::AtLeastCap(10).at_least(11).is_err());
    }
}
