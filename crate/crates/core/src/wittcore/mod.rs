//! p-typical Witt vectors of finite length.
//!
//! The addition and negation laws are generated once per `(p, n)` as integral
//! polynomials by solving the ghost identities with exact division; the
//! successful divisions are the integrality certificate. Arithmetic over an
//! arbitrary ring is evaluation of those polynomials, so nothing here ever
//! divides in the target ring.

mod dump;
mod pfold;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::exactpoly::{MPoly, PolyError, PolyRing, PowerCache, Ring, Var};

pub use dump::{content_hash, WittDump};
pub use pfold::{
    constant_c, pfold_decomposition, ConventionAudit, MiddleConvention, PFoldDecomposition,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WittError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("(p={p}, n={n}) is outside the supported symbolic range")]
    OutOfRange { p: u64, n: usize },
    #[error("integrality violation at component {ell}: {source}")]
    IntegralityViolation { ell: usize, source: PolyError },
    #[error("ghost identity fails at component {ell} ({which})")]
    GhostIdentity { ell: usize, which: &'static str },
    #[error("degree audit failed for {which} at component {ell}: found {found}, expected at least {bound}")]
    DegreeAuditFailure {
        ell: usize,
        which: &'static str,
        found: String,
        bound: u32,
    },
    #[error("variable support check failed for {which} at component {ell}")]
    SupportViolation { ell: usize, which: &'static str },
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Largest `n` for which the binary addition/negation tables are generated.
pub fn binary_max_len(p: u64) -> usize {
    match p {
        2 => 5,
        3 => 4,
        5 => 3,
        _ => 0,
    }
}

/// Largest `n` for which the p-fold decomposition is generated.
pub fn pfold_max_len(p: u64) -> usize {
    match p {
        2 => 4,
        3 => 3,
        5 => 2,
        _ => 0,
    }
}

/// Variable of `X_j` (1-based) in the binary layout.
pub fn x_var(j: usize) -> Var {
    (2 * (j - 1)) as Var
}

/// Variable of `Y_j` (1-based) in the binary layout.
pub fn y_var(j: usize) -> Var {
    (2 * (j - 1) + 1) as Var
}

/// Variable of `x_{ij}` (summand `i`, component `j`, both 1-based) in the
/// p-fold layout.
pub fn pfold_var(p: u64, i: usize, j: usize) -> Var {
    ((j - 1) * p as usize + (i - 1)) as Var
}

fn p_pow(p: u64, k: usize) -> BigInt {
    num_traits::pow(BigInt::from(p), k)
}

/// `sum_{i=1}^{ell} p^{i-1} v_i^{p^{ell-i}}` with `v_i = vars[i-1]`.
pub fn ghost_in(p: u64, ell: usize, vars: &[Var]) -> MPoly {
    assert!(ell >= 1 && vars.len() >= ell);
    let mut w = MPoly::zero();
    for i in 1..=ell {
        let e = p.pow((ell - i) as u32);
        let term = MPoly::var(vars[i - 1]).pow(e).scale(&p_pow(p, i - 1));
        w = w.add(&term);
    }
    w
}

/// Ghost polynomial `w_ell` in the variables `X_j = v_{j-1}`.
pub fn ghost_poly(p: u64, ell: usize) -> MPoly {
    let vars: Vec<Var> = (0..ell as Var).collect();
    ghost_in(p, ell, &vars)
}

fn check_range(p: u64, n: usize, max: usize) -> Result<(), WittError> {
    if !is_prime(p) {
        return Err(WittError::NotPrime(p));
    }
    if n == 0 || n > max {
        return Err(WittError::OutOfRange { p, n });
    }
    Ok(())
}

/// Solves `w_ell(Z_1..Z_ell) = target_ell` for integral `Z_ell`, given the
/// earlier components.
fn solve_ghost_recursion(
    p: u64,
    n: usize,
    target: impl Fn(usize) -> MPoly,
) -> Result<Vec<MPoly>, WittError> {
    let mut out: Vec<MPoly> = Vec::with_capacity(n);
    for ell in 1..=n {
        let mut rest = target(ell);
        for (i, zi) in out.iter().enumerate() {
            let e = p.pow((ell - 1 - i) as u32);
            rest = rest.sub(&zi.pow(e).scale(&p_pow(p, i)));
        }
        let z = rest
            .exact_div_int(&p_pow(p, ell - 1))
            .map_err(|source| WittError::IntegralityViolation { ell, source })?;
        out.push(z);
    }
    Ok(out)
}

/// Addition polynomials `phi_1..phi_n` in the interleaved `X_j, Y_j` layout.
pub fn addition_polys(p: u64, n: usize) -> Result<Vec<MPoly>, WittError> {
    check_range(p, n, binary_max_len(p))?;
    let xs: Vec<Var> = (1..=n).map(x_var).collect();
    let ys: Vec<Var> = (1..=n).map(y_var).collect();
    solve_ghost_recursion(p, n, |ell| ghost_in(p, ell, &xs).add(&ghost_in(p, ell, &ys)))
}

/// Negation polynomials `iota_1..iota_n` in the variables `X_j`.
pub fn negation_polys(p: u64, n: usize) -> Result<Vec<MPoly>, WittError> {
    check_range(p, n, binary_max_len(p))?;
    let xs: Vec<Var> = (1..=n).map(x_var).collect();
    solve_ghost_recursion(p, n, |ell| ghost_in(p, ell, &xs).neg())
}

/// Ghost vector of polynomial components: `(w_1(z), ..., w_n(z))`.
fn ghost_of(p: u64, comps: &[MPoly]) -> Vec<MPoly> {
    let std_vars: Vec<Var> = (0..comps.len() as Var).collect();
    (1..=comps.len())
        .map(|ell| {
            ghost_in(p, ell, &std_vars)
                .eval(&PolyRing, &comps[..ell])
                .expect("all ghost variables assigned")
        })
        .collect()
}

/// A length-n Witt vector over some ring; the ring is supplied to every
/// operation through its [`WittCtx`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittVec<E> {
    components: Vec<E>,
}

impl<E: Clone> WittVec<E> {
    pub fn new(components: Vec<E>) -> Self {
        WittVec { components }
    }

    pub fn components(&self) -> &[E] {
        &self.components
    }

    pub fn into_components(self) -> Vec<E> {
        self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// 1-based component access, matching the usual `(x_1, ..., x_n)`.
    pub fn get(&self, ell: usize) -> &E {
        &self.components[ell - 1]
    }

    pub fn map<F, T: Clone>(&self, f: F) -> WittVec<T>
    where
        F: FnMut(&E) -> T,
    {
        WittVec::new(self.components.iter().map(f).collect())
    }
}

/// Precomputed, certified polynomial tables for `W_n` at a prime `p`.
#[derive(Clone, Debug)]
pub struct WittCtx {
    p: u64,
    n: usize,
    ghost: Vec<MPoly>,
    add: Vec<MPoly>,
    neg: Vec<MPoly>,
}

impl WittCtx {
    /// Generates and certifies the tables: exact divisibility during generation
    /// and the ghost identities as polynomial equalities.
    pub fn new(p: u64, n: usize) -> Result<Self, WittError> {
        let add = addition_polys(p, n)?;
        let neg = negation_polys(p, n)?;
        let ghost: Vec<MPoly> = (1..=n).map(|ell| ghost_poly(p, ell)).collect();

        let xs_vars: Vec<Var> = (1..=n).map(x_var).collect();
        let ys_vars: Vec<Var> = (1..=n).map(y_var).collect();
        let sum_ghost = ghost_of(p, &add);
        let neg_ghost = ghost_of(p, &neg);
        for ell in 1..=n {
            let wx = ghost_in(p, ell, &xs_vars);
            let wy = ghost_in(p, ell, &ys_vars);
            if sum_ghost[ell - 1] != wx.add(&wy) {
                return Err(WittError::GhostIdentity { ell, which: "addition" });
            }
            if neg_ghost[ell - 1] != wx.neg() {
                return Err(WittError::GhostIdentity { ell, which: "negation" });
            }
        }
        Ok(WittCtx { p, n, ghost, add, neg })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn ghost_polys(&self) -> &[MPoly] {
        &self.ghost
    }

    pub fn addition_polys(&self) -> &[MPoly] {
        &self.add
    }

    pub fn negation_polys(&self) -> &[MPoly] {
        &self.neg
    }

    /// The context for length `m <= n`; the tables are prefixes.
    pub fn truncated(&self, m: usize) -> WittCtx {
        assert!(m >= 1 && m <= self.n, "truncation length out of range");
        WittCtx {
            p: self.p,
            n: m,
            ghost: self.ghost[..m].to_vec(),
            add: self.add[..m].to_vec(),
            neg: self.neg[..m].to_vec(),
        }
    }

    fn check_len<E>(&self, a: &WittVec<E>) {
        assert_eq!(a.components.len(), self.n, "Witt vector length does not match context");
    }

    pub fn zero<R: Ring>(&self, ring: &R) -> WittVec<R::Elem> {
        WittVec::new(vec![ring.zero(); self.n])
    }

    pub fn add<R: Ring>(
        &self,
        ring: &R,
        a: &WittVec<R::Elem>,
        b: &WittVec<R::Elem>,
    ) -> WittVec<R::Elem> {
        self.check_len(a);
        self.check_len(b);
        let mut values = Vec::with_capacity(2 * self.n);
        for (x, y) in a.components.iter().zip(&b.components) {
            values.push(x.clone());
            values.push(y.clone());
        }
        let mut cache = PowerCache::new(ring, &values);
        let comps = self
            .add
            .iter()
            .map(|phi| cache.eval(phi).expect("addition polynomial fully assigned"))
            .collect();
        WittVec::new(comps)
    }

    pub fn neg<R: Ring>(&self, ring: &R, a: &WittVec<R::Elem>) -> WittVec<R::Elem> {
        self.check_len(a);
        let mut values = Vec::with_capacity(2 * self.n);
        for x in &a.components {
            values.push(x.clone());
            values.push(ring.zero());
        }
        let mut cache = PowerCache::new(ring, &values);
        let comps = self
            .neg
            .iter()
            .map(|iota| cache.eval(iota).expect("negation polynomial fully assigned"))
            .collect();
        WittVec::new(comps)
    }

    pub fn sub<R: Ring>(
        &self,
        ring: &R,
        a: &WittVec<R::Elem>,
        b: &WittVec<R::Elem>,
    ) -> WittVec<R::Elem> {
        self.add(ring, a, &self.neg(ring, b))
    }

    /// Left fold of binary addition; the empty sum is zero.
    pub fn sum<R: Ring>(&self, ring: &R, vs: &[WittVec<R::Elem>]) -> WittVec<R::Elem> {
        let mut it = vs.iter();
        let Some(first) = it.next() else {
            return self.zero(ring);
        };
        self.check_len(first);
        it.fold(first.clone(), |acc, v| self.add(ring, &acc, v))
    }

    /// Projection `W_n -> W_m`, a group homomorphism.
    pub fn truncate<E: Clone>(&self, a: &WittVec<E>, m: usize) -> WittVec<E> {
        self.check_len(a);
        assert!(m >= 1 && m <= self.n, "truncation length out of range");
        WittVec::new(a.components[..m].to_vec())
    }

    /// Ghost map; additive by construction of the addition law.
    pub fn ghost_components<R: Ring>(&self, ring: &R, a: &WittVec<R::Elem>) -> Vec<R::Elem> {
        self.check_len(a);
        let mut cache = PowerCache::new(ring, &a.components);
        self.ghost
            .iter()
            .map(|w| cache.eval(w).expect("ghost polynomial fully assigned"))
            .collect()
    }

    /// Value of the correction term `f_ell` of a multi-fold sum: the ell-th
    /// component of the sum after zeroing every summand's ell-th component.
    /// Needs only the binary tables.
    pub fn fold_correction<R: Ring>(
        &self,
        ring: &R,
        vs: &[WittVec<R::Elem>],
        ell: usize,
    ) -> R::Elem {
        let zeroed: Vec<WittVec<R::Elem>> = vs
            .iter()
            .map(|v| {
                let mut w = self.truncate(v, ell);
                w.components[ell - 1] = ring.zero();
                w
            })
            .collect();
        let sum = self.truncated(ell).sum(ring, &zeroed);
        sum.components[ell - 1].clone()
    }
}

/// Generic p-fold sum: sum of `count` symbolic Witt vectors in the p-fold
/// layout, computed by folding the binary law over the polynomial ring.
pub(crate) fn symbolic_fold(ctx: &WittCtx, count: usize) -> Vec<MPoly> {
    let p = ctx.p();
    let vecs: Vec<WittVec<MPoly>> = (1..=count)
        .map(|i| WittVec::new((1..=ctx.len()).map(|j| MPoly::var(pfold_var(p, i, j))).collect()))
        .collect();
    ctx.sum(&PolyRing, &vecs).into_components()
}

pub(crate) fn binom(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::{Integers, IntegersMod, Monomial};

    fn xv(j: usize) -> MPoly {
        MPoly::var(x_var(j))
    }
    fn yv(j: usize) -> MPoly {
        MPoly::var(y_var(j))
    }
    fn int(k: i64) -> BigInt {
        BigInt::from(k)
    }

    #[test]
    fn ghost_examples() {
        assert_eq!(ghost_poly(2, 1), MPoly::var(0));
        let w = ghost_poly(2, 2);
        assert_eq!(w, MPoly::var(0).pow(2).add(&MPoly::var(1).scale(&int(2))));
        let w3 = ghost_poly(3, 3);
        let expected = MPoly::var(0)
            .pow(9)
            .add(&MPoly::var(1).pow(3).scale(&int(3)))
            .add(&MPoly::var(2).scale(&int(9)));
        assert_eq!(w3, expected);
    }

    #[test]
    fn first_addition_poly_is_sum() {
        for p in [2, 3, 5] {
            let phi = addition_polys(p, 1).unwrap();
            assert_eq!(phi[0], xv(1).add(&yv(1)));
        }
    }

    /// Independent check: the stated phi_2 satisfies the ghost identity.
    fn ghost_identity_holds(p: u64, phi2: &MPoly) -> bool {
        let phi1 = xv(1).add(&yv(1));
        let lhs = phi1.pow(p).add(&phi2.scale(&int(p as i64)));
        let rhs = xv(1)
            .pow(p)
            .add(&xv(2).scale(&int(p as i64)))
            .add(&yv(1).pow(p))
            .add(&yv(2).scale(&int(p as i64)));
        lhs == rhs
    }

    #[test]
    fn second_addition_poly_p2() {
        let expected = xv(2).add(&yv(2)).sub(&xv(1).mul(&yv(1)));
        assert!(ghost_identity_holds(2, &expected));
        assert_eq!(addition_polys(2, 2).unwrap()[1], expected);
    }

    #[test]
    fn second_addition_poly_p3() {
        let expected = xv(2)
            .add(&yv(2))
            .sub(&xv(1).pow(2).mul(&yv(1)))
            .sub(&xv(1).mul(&yv(1).pow(2)));
        assert!(ghost_identity_holds(3, &expected));
        assert_eq!(addition_polys(3, 2).unwrap()[1], expected);
    }

    #[test]
    fn negation_examples() {
        for p in [3, 5] {
            let iota = negation_polys(p, binary_max_len(p)).unwrap();
            for (k, poly) in iota.iter().enumerate() {
                assert_eq!(*poly, xv(k + 1).neg());
            }
        }
        let iota = negation_polys(2, 2).unwrap();
        assert_eq!(iota[0], xv(1).neg());
        assert_eq!(iota[1], xv(2).neg().sub(&xv(1).pow(2)));
    }

    #[test]
    fn range_checks() {
        assert_eq!(addition_polys(2, 6), Err(WittError::OutOfRange { p: 2, n: 6 }));
        assert_eq!(addition_polys(4, 2), Err(WittError::NotPrime(4)));
        assert_eq!(addition_polys(3, 0), Err(WittError::OutOfRange { p: 3, n: 0 }));
    }

    #[test]
    fn add_over_integers_and_residues() {
        let ctx = WittCtx::new(2, 2).unwrap();
        let a = WittVec::new(vec![int(1), int(0)]);
        let s = ctx.add(&Integers, &a, &a);
        assert_eq!(s, WittVec::new(vec![int(2), int(-1)]));
        // ghost cross-check: w(2,-1) = (2, 4 - 2) = 2 * w(1,0)
        assert_eq!(ctx.ghost_components(&Integers, &s), vec![int(2), int(2)]);

        let z8 = IntegersMod::new(int(8));
        let s8 = ctx.add(&z8, &a, &a);
        assert_eq!(s8, WittVec::new(vec![int(2), int(7)]));

        let zero = ctx.zero(&Integers);
        let x = WittVec::new(vec![int(5), int(-7)]);
        assert_eq!(ctx.add(&Integers, &zero, &x), x);
    }

    #[test]
    fn threefold_sum_of_ones() {
        // ghost oracle: w(1,0) = (1, 1), so the sum has ghost vector (3, 3),
        // giving z1 = 3 and 27 + 3*z2 = 3
        let ctx = WittCtx::new(3, 2).unwrap();
        let one = WittVec::new(vec![int(1), int(0)]);
        let s = ctx.sum(&Integers, &[one.clone(), one.clone(), one.clone()]);
        assert_eq!(s, WittVec::new(vec![int(3), int(-8)]));
        assert_eq!(ctx.ghost_components(&Integers, &s), vec![int(3), int(3)]);
        let f2 = ctx.fold_correction(&Integers, &[one.clone(), one.clone(), one], 2);
        assert_eq!(f2, int(-8));
    }

    #[test]
    fn sum_of_zeros_and_inverse() {
        let ctx = WittCtx::new(2, 3).unwrap();
        let zero = ctx.zero(&Integers);
        assert_eq!(ctx.sum(&Integers, &[zero.clone(), zero.clone()]), zero);
        let z16 = IntegersMod::new(int(16));
        let x = WittVec::new(vec![int(3), int(11), int(6)]);
        assert_eq!(ctx.add(&z16, &x, &ctx.neg(&z16, &x)), ctx.zero(&z16));
    }

    #[test]
    fn truncation() {
        let ctx = WittCtx::new(3, 3).unwrap();
        let a = WittVec::new(vec![int(2), int(5), int(-1)]);
        let b = WittVec::new(vec![int(4), int(1), int(7)]);
        let short = ctx.truncated(2);
        let lhs = ctx.truncate(&ctx.add(&Integers, &a, &b), 2);
        let rhs = short.add(&Integers, &ctx.truncate(&a, 2), &ctx.truncate(&b, 2));
        assert_eq!(lhs, rhs);
        assert_eq!(ctx.truncate(&a, 1), WittVec::new(vec![int(2)]));
    }

    #[test]
    fn phi_depends_on_prefix_only() {
        let phi = addition_polys(2, 4).unwrap();
        for (k, poly) in phi.iter().enumerate() {
            let ell = k + 1;
            assert!(poly.vars().iter().all(|&v| (v as usize) < 2 * ell));
            assert!(poly.coeff(&Monomial::var(x_var(ell))) == BigInt::one());
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), int(10));
        assert_eq!(binom(7, 0), int(1));
        assert_eq!(binom(3, 3), int(1));
    }
}
