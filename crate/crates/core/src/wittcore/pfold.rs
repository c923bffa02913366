//! Decomposition of the sum of `p` Witt vectors.
//!
//! With `z = x_1 + ... + x_p` (Witt addition), each component splits as
//! `z_l = sum_i x_{il} + f_l` where `f_l` only involves components below `l`.
//! Substituting `z_{l-1} = S + f_{l-1}` (with `S = sum_i x_{i,l-1}`) into the
//! ghost expression for `f_l` isolates a first term `(P - S^p)/p`, a middle
//! term built from binomials, and a residual `h_{l-2}` that only sees
//! components `<= l-2`. The residual is computed by subtraction for every
//! candidate form of the middle term, and each candidate is audited.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::{binom, binary_max_len, check_range, ghost_in, pfold_max_len, pfold_var, symbolic_fold};
use super::{WittCtx, WittError};
use crate::exactpoly::{Degree, MPoly, PolyRing, Var};

/// Candidate readings of the middle term of the decomposition of `f_l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiddleConvention {
    /// `f = first - (1/p) sum_{j=1}^{p-1} C(p,j) S^{p-j} f_{l-1}^j + h`
    Minus,
    /// `f = first + (1/p) sum_{j=1}^{p-1} C(p,j) S^{p-j} f_{l-1}^j + h`
    Plus,
    /// `f = first + (1/p) sum_{j=1}^{p-1} C(p,j) (sum_i x_{i,l-1}^{p-j}) f_{l-1}^j + h`
    PlusPowerInside,
    /// `f = first - (1/p) sum_{j=2}^{p-1} C(p,j) S^{p-j} f_{l-1}^j + h`
    MinusFromTwo,
}

impl MiddleConvention {
    pub const ALL: [MiddleConvention; 4] = [
        MiddleConvention::Minus,
        MiddleConvention::Plus,
        MiddleConvention::PlusPowerInside,
        MiddleConvention::MinusFromTwo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MiddleConvention::Minus => "minus",
            MiddleConvention::Plus => "plus",
            MiddleConvention::PlusPowerInside => "plus-power-inside",
            MiddleConvention::MinusFromTwo => "minus-from-two",
        }
    }
}

/// Audit outcome of one convention at one component.
#[derive(Clone, Debug, Serialize)]
pub struct ConventionAudit {
    pub convention: MiddleConvention,
    pub ell: usize,
    pub min_degree: String,
    pub degree_ok: bool,
    pub support_ok: bool,
}

impl ConventionAudit {
    pub fn passed(&self) -> bool {
        self.degree_ok && self.support_ok
    }
}

#[derive(Clone, Debug)]
pub struct PFoldDecomposition {
    p: u64,
    n: usize,
    g: Vec<MPoly>,
    f: Vec<MPoly>,
    /// `h[l-1]` is `h_{l-2}` for `l >= 2`; `h[0]` is unused and zero.
    h: Vec<MPoly>,
    audits: Vec<ConventionAudit>,
    convention: MiddleConvention,
}

/// The integer `(1/p) sum_{j=1}^{p-1} (-1)^j C(p,j)`.
pub fn constant_c(p: u64) -> BigInt {
    let mut acc = BigInt::zero();
    for j in 1..p {
        let b = binom(p, j);
        if j % 2 == 1 {
            acc -= b;
        } else {
            acc += b;
        }
    }
    let pb = BigInt::from(p);
    assert!((&acc % &pb).is_zero());
    acc / pb
}

fn component_sum(p: u64, j: usize, power: u64) -> MPoly {
    (1..=p as usize).fold(MPoly::zero(), |acc, i| acc.add(&MPoly::var(pfold_var(p, i, j)).pow(power)))
}

fn support_below(poly: &MPoly, p: u64, max_component: usize) -> bool {
    poly.vars()
        .iter()
        .all(|&v| (v as usize) / (p as usize) < max_component)
}

fn middle_term(
    p: u64,
    convention: MiddleConvention,
    s: &MPoly,
    f_prev: &MPoly,
    ell: usize,
    ell_int: impl Fn(MPoly) -> Result<MPoly, WittError>,
) -> Result<MPoly, WittError> {
    let start = if convention == MiddleConvention::MinusFromTwo { 2 } else { 1 };
    let mut acc = MPoly::zero();
    for j in start..p {
        let base = match convention {
            MiddleConvention::PlusPowerInside => component_sum(p, ell - 1, p - j),
            _ => s.pow(p - j),
        };
        acc = acc.add(&base.mul(&f_prev.pow(j)).scale(&binom(p, j)));
    }
    // every C(p, j) with 0 < j < p is divisible by p
    ell_int(acc)
}

/// Builds the decomposition for `(p, n)` inside the supported p-fold range.
pub fn pfold_decomposition(p: u64, n: usize) -> Result<PFoldDecomposition, WittError> {
    check_range(p, n, pfold_max_len(p))?;
    debug_assert!(n <= binary_max_len(p));
    let ctx = WittCtx::new(p, n)?;
    let g = symbolic_fold(&ctx, p as usize);

    // ghost cross-check of the fold: w_l(g) = sum_i w_l(x_i)
    let std_vars: Vec<Var> = (0..n as Var).collect();
    for ell in 1..=n {
        let lhs = ghost_in(p, ell, &std_vars)
            .eval(&PolyRing, &g[..ell])
            .expect("assigned");
        let rhs = (1..=p as usize).fold(MPoly::zero(), |acc, i| {
            let vars: Vec<Var> = (1..=ell).map(|j| pfold_var(p, i, j)).collect();
            acc.add(&ghost_in(p, ell, &vars))
        });
        if lhs != rhs {
            return Err(WittError::GhostIdentity { ell, which: "p-fold sum" });
        }
    }

    let mut f = Vec::with_capacity(n);
    for (k, gl) in g.iter().enumerate() {
        let ell = k + 1;
        let fl = gl.sub(&component_sum(p, ell, 1));
        if !support_below(&fl, p, ell - 1) {
            return Err(WittError::SupportViolation { ell, which: "f" });
        }
        let d = fl.min_monomial_degree();
        if !d.at_least(p as u32) {
            return Err(WittError::DegreeAuditFailure {
                ell,
                which: "f",
                found: d.to_string(),
                bound: p as u32,
            });
        }
        f.push(fl);
    }

    let pb = BigInt::from(p);
    let p_sq = (p * p) as u32;
    let mut audits = Vec::new();
    let mut candidates: Vec<Vec<MPoly>> = vec![vec![MPoly::zero()]; MiddleConvention::ALL.len()];
    for ell in 2..=n {
        let div = |poly: MPoly| {
            poly.exact_div_int(&pb)
                .map_err(|source| WittError::IntegralityViolation { ell, source })
        };
        let s = component_sum(p, ell - 1, 1);
        let first = div(component_sum(p, ell - 1, p).sub(&s.pow(p)))?;
        let base = f[ell - 1].sub(&first);
        for (ci, &conv) in MiddleConvention::ALL.iter().enumerate() {
            let middle = middle_term(p, conv, &s, &f[ell - 2], ell, div)?;
            let h = match conv {
                MiddleConvention::Minus | MiddleConvention::MinusFromTwo => base.add(&middle),
                MiddleConvention::Plus | MiddleConvention::PlusPowerInside => base.sub(&middle),
            };
            let d = h.min_monomial_degree();
            audits.push(ConventionAudit {
                convention: conv,
                ell,
                min_degree: d.to_string(),
                degree_ok: d.at_least(p_sq),
                support_ok: support_below(&h, p, ell.saturating_sub(2)),
            });
            candidates[ci].push(h);
        }
    }

    let passing = |conv: MiddleConvention| {
        audits
            .iter()
            .filter(|a| a.convention == conv)
            .all(ConventionAudit::passed)
    };
    let Some(ci) = MiddleConvention::ALL.iter().position(|&c| passing(c)) else {
        let worst = audits
            .iter()
            .find(|a| a.convention == MiddleConvention::Minus && !a.passed())
            .expect("some audit failed");
        return Err(WittError::DegreeAuditFailure {
            ell: worst.ell,
            which: "h",
            found: worst.min_degree.clone(),
            bound: p_sq,
        });
    };
    let convention = MiddleConvention::ALL[ci];
    let h = candidates.swap_remove(ci);

    Ok(PFoldDecomposition {
        p,
        n,
        g,
        f,
        h,
        audits,
        convention,
    })
}

impl PFoldDecomposition {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Full component `g_l` of the p-fold sum.
    pub fn g(&self, ell: usize) -> &MPoly {
        &self.g[ell - 1]
    }

    pub fn f(&self, ell: usize) -> &MPoly {
        &self.f[ell - 1]
    }

    /// Residual `h_{l-2}` of component `l >= 2`, under the selected convention.
    pub fn h(&self, ell: usize) -> &MPoly {
        assert!(ell >= 2, "h is indexed by components l >= 2");
        &self.h[ell - 1]
    }

    pub fn audits(&self) -> &[ConventionAudit] {
        &self.audits
    }

    /// The first convention (in [`MiddleConvention::ALL`] order) whose
    /// residuals pass every audit.
    pub fn convention(&self) -> MiddleConvention {
        self.convention
    }

    /// All conventions passing every audit.
    pub fn passing_conventions(&self) -> Vec<MiddleConvention> {
        MiddleConvention::ALL
            .iter()
            .copied()
            .filter(|&c| {
                self.audits
                    .iter()
                    .filter(|a| a.convention == c)
                    .all(ConventionAudit::passed)
            })
            .collect()
    }

    pub fn min_degree_f(&self, ell: usize) -> Degree {
        self.f(ell).min_monomial_degree()
    }

    pub fn min_degree_h(&self, ell: usize) -> Degree {
        self.h(ell).min_monomial_degree()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values() {
        assert_eq!(constant_c(2), BigInt::from(-1));
        assert_eq!(constant_c(3), BigInt::zero());
        // (1/5)(-5 + 10 - 10 + 5) = 0
        assert_eq!(constant_c(5), BigInt::zero());
    }

    #[test]
    fn first_component_has_no_correction() {
        for p in [2, 3, 5] {
            let d = pfold_decomposition(p, 1).unwrap();
            assert!(d.f(1).is_zero());
        }
    }

    #[test]
    fn f2_for_p2() {
        let d = pfold_decomposition(2, 2).unwrap();
        let x11 = MPoly::var(pfold_var(2, 1, 1));
        let x21 = MPoly::var(pfold_var(2, 2, 1));
        // oracle: (x11^2 + x21^2 - (x11 + x21)^2) / 2
        let s = x11.add(&x21);
        let oracle = x11
            .pow(2)
            .add(&x21.pow(2))
            .sub(&s.pow(2))
            .exact_div_int(&BigInt::from(2))
            .unwrap();
        assert_eq!(*d.f(2), oracle);
        assert_eq!(*d.f(2), x11.mul(&x21).neg());
        assert_eq!(d.min_degree_f(2), Degree::Finite(2));
        assert!(d.h(2).is_zero());
    }

    #[test]
    fn degree_bounds_p2_n3() {
        let d = pfold_decomposition(2, 3).unwrap();
        assert!(d.min_degree_f(3).at_least(2));
        assert!(d.min_degree_h(3).at_least(4));
        assert_eq!(d.convention(), MiddleConvention::Minus);
        assert_eq!(d.passing_conventions(), vec![MiddleConvention::Minus]);
    }

    #[test]
    fn p3_convention_audit() {
        let d = pfold_decomposition(3, 3).unwrap();
        assert_eq!(d.convention(), MiddleConvention::Minus);
        for a in d.audits().iter().filter(|a| a.ell == 3) {
            assert_eq!(a.passed(), a.convention == MiddleConvention::Minus, "{a:?}");
        }
    }

    #[test]
    fn out_of_pfold_range() {
        assert_eq!(
            pfold_decomposition(5, 3).unwrap_err(),
            WittError::OutOfRange { p: 5, n: 3 }
        );
    }
}
