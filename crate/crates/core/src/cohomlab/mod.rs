//! Galois cohomology of truncated Witt vectors for a cyclic degree-p step
//! `L/K`, through `H^1(G, W_n(O_L)) = W_n(O_L)^{tr=0} / (sigma - 1) W_n(O_L)`.

mod oracle;
mod verify;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::localfield::{LfError, OElem, TopRing, Tower};
use crate::wittcore::{WittCtx, WittError, WittVec};

pub use oracle::{
    brute_h1_order, brute_h1_order_stable, check_linsolve_by_enumeration, EnumerationCheck,
    H1Oracle,
};
pub use verify::{
    run_lemma, sample_seed, Failure, LemmaId, Status, VerificationReport, VerifyParams,
};

/// Resample attempts for the previous component when a level is unsolvable.
pub const LEVEL_RETRIES: usize = 32;
/// Fresh starts of the whole recursive construction.
pub const SAMPLER_RESTARTS: usize = 64;
/// Default node budget of the coset search in [`witt_class_trivial`].
pub const DEFAULT_SEARCH_BUDGET: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomError {
    #[error(transparent)]
    Field(#[from] LfError),
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error("sampler exhausted at level {level} after {retries} retries")]
    SamplerExhausted { level: usize, retries: usize },
    #[error("element does not have trace zero at precision")]
    NotTraceZero,
    #[error("H^1 order did not stabilize: {orders:?}")]
    NotStabilized { orders: Vec<String> },
    #[error("identity fails at component {ell} of sample {sample} under both sign conventions")]
    IdentityFailure { ell: usize, sample: u64 },
    #[error("enumeration too large: {0} elements")]
    EnumerationTooLarge(u128),
}

/// The `p` conjugate Witt vectors `sigma^i x`, `i = 0..p-1`.
pub fn conjugate_vectors(tower: &Tower, x: &WittVec<OElem>) -> Vec<WittVec<OElem>> {
    let p = tower.p() as usize;
    let mut out = Vec::with_capacity(p);
    let mut cur = x.clone();
    for _ in 0..p {
        let next = cur.map(|a| tower.galois(a));
        out.push(cur);
        cur = next;
    }
    out
}

/// Values for the p-fold variable layout: `x_{ij} = sigma^(i-1) x_j`.
pub fn conjugate_family(tower: &Tower, comps: &[OElem]) -> Vec<OElem> {
    let p = tower.p() as usize;
    let mut vals = vec![tower.top_zero(); comps.len() * p];
    for (j, x) in comps.iter().enumerate() {
        for (i, c) in tower.conjugates(&tower.embed(x)).into_iter().enumerate() {
            vals[j * p + i] = c;
        }
    }
    vals
}

/// Witt sum of the conjugates, with every component checked to lie in `O_K`.
pub fn witt_trace(tower: &Tower, ctx: &WittCtx, x: &WittVec<OElem>) -> Result<WittVec<OElem>, CohomError> {
    let ring = TopRing(tower);
    let top = ctx.sum(&ring, &conjugate_vectors(tower, x));
    let comps = top
        .components()
        .iter()
        .map(|c| tower.base_part(c).ok_or(CohomError::Field(LfError::TraceNotRational)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WittVec::new(comps))
}

/// `sigma(y) - y` in `W_n(O_L)`.
pub fn coboundary(tower: &Tower, ctx: &WittCtx, y: &WittVec<OElem>) -> WittVec<OElem> {
    let ring = TopRing(tower);
    ctx.sub(&ring, &y.map(|a| tower.galois(a)), y)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    RecursiveSampler,
    CoboundaryOf(WittVec<OElem>),
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::RecursiveSampler => "recursive-sampler",
            Provenance::CoboundaryOf(_) => "coboundary",
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelSample {
    pub vec: WittVec<OElem>,
    /// The Witt trace, zero at precision.
    pub residual: WittVec<OElem>,
    pub provenance: Provenance,
    pub seed: u64,
    /// Level failures absorbed by resampling.
    pub retries: usize,
}

fn random_combination<R: Rng + ?Sized>(tower: &Tower, basis: &[OElem], rng: &mut R) -> OElem {
    let q = tower.zpn().modulus();
    basis.iter().fold(tower.top_zero(), |acc, b| {
        let k = rng.gen_range(0..q) as i64;
        tower.add(&acc, &tower.scale_int(b, k))
    })
}

/// `c_ell`: the `ell`-th component of the Witt sum of the conjugates of
/// `(x_1, ..., x_{ell-1}, 0)`.
fn level_rhs(tower: &Tower, ctx: &WittCtx, prefix: &[OElem]) -> OElem {
    let ell = prefix.len() + 1;
    let ring = TopRing(tower);
    let mut padded = prefix.to_vec();
    padded.resize(ctx.len(), tower.top_zero());
    let conj = conjugate_vectors(tower, &WittVec::new(padded));
    ctx.fold_correction(&ring, &conj, ell)
}

fn is_zero_vec(v: &WittVec<OElem>) -> bool {
    v.components().iter().all(OElem::is_zero)
}

/// Draws an element of `W_n(O_L)^{tr=0}` one component at a time: `x_1` from
/// the trace kernel, then `x_ell` solving `tr(x_ell) = -c_ell` plus a random
/// kernel element.
pub fn sample_trace_zero<R: Rng + ?Sized>(
    tower: &Tower,
    ctx: &WittCtx,
    rng: &mut R,
    seed: u64,
) -> Result<KernelSample, CohomError> {
    let n = ctx.len();
    let kernel = tower.solve_trace_eq(&tower.base_zero())?;
    let basis: Vec<OElem> = kernel.free_kernel.iter().chain(&kernel.precision_kernel).cloned().collect();
    let mut retries = 0;
    let mut last_level = 1;
    for _ in 0..SAMPLER_RESTARTS {
        let mut particular = vec![tower.top_zero()];
        let mut comps = vec![random_combination(tower, &basis, rng)];
        let mut complete = true;
        for ell in 2..=n {
            let mut solved = None;
            for _ in 0..LEVEL_RETRIES {
                let c = level_rhs(tower, ctx, &comps);
                match tower.solve_trace_eq(&tower.neg(&c)) {
                    Ok(sol) => {
                        solved = Some(sol.x);
                        break;
                    }
                    Err(LfError::NoSolutionAtPrecision { .. }) => {
                        retries += 1;
                        let k = comps.len() - 1;
                        comps[k] = tower.add(&particular[k], &random_combination(tower, &basis, rng));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            match solved {
                Some(x) => {
                    comps.push(tower.add(&x, &random_combination(tower, &basis, rng)));
                    particular.push(x);
                }
                None => {
                    last_level = ell;
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            let vec = WittVec::new(comps);
            let residual = witt_trace(tower, ctx, &vec)?;
            if !is_zero_vec(&residual) {
                return Err(CohomError::NotTraceZero);
            }
            return Ok(KernelSample { vec, residual, provenance: Provenance::RecursiveSampler, seed, retries });
        }
    }
    Err(CohomError::SamplerExhausted { level: last_level, retries })
}

/// `sigma(y) - y` for a uniformly random `y`.
pub fn sample_coboundary<R: Rng + ?Sized>(
    tower: &Tower,
    ctx: &WittCtx,
    rng: &mut R,
    seed: u64,
) -> Result<KernelSample, CohomError> {
    let y = WittVec::new((0..ctx.len()).map(|_| tower.random_top(rng)).collect());
    let vec = coboundary(tower, ctx, &y);
    let residual = witt_trace(tower, ctx, &vec)?;
    if !is_zero_vec(&residual) {
        return Err(CohomError::NotTraceZero);
    }
    Ok(KernelSample { vec, residual, provenance: Provenance::CoboundaryOf(y), seed, retries: 0 })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Level1Class {
    /// `(sigma - 1) witness = x_1` modulo `p^precision`.
    Trivial { witness: OElem, precision: u32 },
    /// No preimage; the obstruction sits at this digit depth.
    Nontrivial { depth: u32 },
}

impl Level1Class {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Level1Class::Trivial { .. })
    }
}

/// Decides whether a trace-zero element of `O_L` is a coboundary.
pub fn level1_class_trivial(tower: &Tower, x1: &OElem) -> Result<Level1Class, CohomError> {
    let x1 = tower.embed(x1);
    if !tower.trace(&x1)?.is_zero() {
        return Err(CohomError::NotTraceZero);
    }
    match tower.solve_sigma_minus_one(&x1) {
        Ok(sol) => Ok(Level1Class::Trivial { witness: sol.x, precision: sol.precision }),
        Err(LfError::NoSolutionAtPrecision { depth }) => Ok(Level1Class::Nontrivial { depth }),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WittClass {
    /// `sigma(witness) - witness = x` modulo `p^precision` in every component.
    Trivial { witness: WittVec<OElem>, precision: u32 },
    /// No witness found within the search budget; never a proof of nontriviality.
    Undetermined { explored: usize },
}

impl WittClass {
    pub fn is_trivial(&self) -> bool {
        matches!(self, WittClass::Trivial { .. })
    }
}

struct Search<'a> {
    tower: &'a Tower,
    ctx: &'a WittCtx,
    x: &'a [OElem],
    budget: usize,
    explored: usize,
    translates: Vec<OElem>,
}

impl Search<'_> {
    fn check_digits(&self, ell: usize) -> u32 {
        let loss = ell as u32 * (self.tower.delta() + 1);
        self.tower.precision().saturating_sub(loss)
    }

    fn dfs(&mut self, ys: &mut Vec<OElem>) -> bool {
        let n = self.ctx.len();
        let ell = ys.len() + 1;
        if ell > n {
            return true;
        }
        if self.explored >= self.budget {
            return false;
        }
        self.explored += 1;
        let t = self.tower;
        let rhs = if ell == 1 {
            self.x[0].clone()
        } else {
            let mut padded = ys.clone();
            padded.resize(n, t.top_zero());
            let cob = coboundary(t, self.ctx, &WittVec::new(padded));
            t.sub(&self.x[ell - 1], cob.get(ell))
        };
        let Ok(sol) = t.solve_sigma_minus_one_checked(&rhs, self.check_digits(ell)) else {
            return false;
        };
        let translates = self.translates.clone();
        let z = t.zpn();
        // precision-kernel combinations first, then the base-ring translates
        let mut cands = vec![sol.x.clone()];
        for k in &sol.precision_kernel {
            let mut more = Vec::new();
            for c in &cands {
                let mut acc = c.clone();
                for _ in 1..z.p() {
                    acc = t.add(&acc, k);
                    more.push(acc.clone());
                }
            }
            cands.extend(more);
        }
        let base: Vec<OElem> = cands.clone();
        for tr in &translates {
            cands.extend(base.iter().map(|c| t.add(c, tr)));
        }
        for c in cands {
            ys.push(c);
            if self.dfs(ys) {
                return true;
            }
            ys.pop();
            if self.explored >= self.budget {
                return false;
            }
        }
        false
    }
}

/// Searches for `y` with `sigma(y) - y = x`, level by level. Each level is a
/// linear `(sigma - 1)` equation; the ambiguity of earlier levels is explored
/// over precision-kernel combinations and a few `O_K` translates.
pub fn witt_class_trivial(
    tower: &Tower,
    ctx: &WittCtx,
    x: &WittVec<OElem>,
    budget: usize,
) -> WittClass {
    let fixed = tower.solve_sigma_minus_one(&tower.top_zero()).map(|s| s.free_kernel).unwrap_or_default();
    let mut search = Search { tower, ctx, x: x.components(), budget, explored: 0, translates: fixed };
    let mut ys = Vec::new();
    if search.dfs(&mut ys) {
        let witness = WittVec::new(ys);
        let diff = ctx.sub(&TopRing(tower), &coboundary(tower, ctx, &witness), x);
        let precision = diff.components().iter().map(|c| tower.zero_digits(c)).min().unwrap_or(0);
        if precision >= search.check_digits(ctx.len()) {
            return WittClass::Trivial { witness, precision };
        }
    }
    WittClass::Undetermined { explored: search.explored }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct H1Order {
    pub order: String,
    pub exponent: u32,
    /// Elementary divisor valuations of `sigma - 1` at each precision.
    pub divisors: Vec<Vec<u32>>,
    pub precisions: Vec<u32>,
}

impl H1Order {
    pub fn order_u128(&self) -> u128 {
        self.order.parse().expect("order is an integer")
    }
}

fn h1_exponent(tower: &Tower) -> Result<(u32, Vec<u32>), CohomError> {
    let want = (tower.p() as usize - 1) * tower.e_k();
    let mut divs: Vec<u32> = tower.sigma_minus_one_smith().pivots().to_vec();
    if divs.len() != want {
        return Err(CohomError::NotStabilized {
            orders: vec![format!("rank {} at N = {}, expected {want}", divs.len(), tower.precision())],
        });
    }
    divs.sort();
    Ok((divs.iter().sum(), divs))
}

/// `|ker tr / im(sigma - 1)|` on `O_L` from the elementary divisors of
/// `sigma - 1`, accepted only when precisions `N` and `N + 2` agree.
pub fn h1_order_level1(tower: &Tower) -> Result<H1Order, CohomError> {
    let higher = tower.at_precision(tower.precision() + 2)?;
    let (a, da) = h1_exponent(tower)?;
    let (b, db) = h1_exponent(&higher)?;
    let p = BigInt::from(tower.p());
    if a != b {
        return Err(CohomError::NotStabilized {
            orders: vec![num_traits::pow(p.clone(), a as usize).to_string(), num_traits::pow(p, b as usize).to_string()],
        });
    }
    Ok(H1Order {
        order: num_traits::pow(p, a as usize).to_string(),
        exponent: a,
        divisors: vec![da, db],
        precisions: vec![tower.precision(), higher.precision()],
    })
}

fn partial_bound(s: u64, p: u64, terms: u32) -> BigRational {
    let pr = BigRational::from_integer(BigInt::from(p));
    let mut sum = BigRational::zero();
    let mut w = BigRational::one();
    for _ in 0..terms {
        sum += &w;
        w /= &pr;
    }
    BigRational::new(BigInt::from(s * (p - 1)), BigInt::from(p)) * sum
}

/// Least `M` with `s(p-1)/p * (1 + 1/p + ... + 1/p^(M-2)) > s - 1`.
pub fn compute_m(s: u64, p: u64) -> u32 {
    assert!(s >= 1 && p >= 2);
    let target = BigRational::from_integer(BigInt::from(s) - 1);
    let mut m = 1u32;
    while partial_bound(s, p, m - 1) <= target {
        m += 1;
    }
    m
}

/// The same `M` via the closed form: least `M` with `p^(M-1) > s`.
pub fn compute_m_closed(s: u64, p: u64) -> u32 {
    let mut m = 1u32;
    let mut pw: u128 = 1;
    while pw <= s as u128 {
        pw *= p as u128;
        m += 1;
    }
    m
}

/// `ceil(s(p-1)/p * sum_{k<i} p^-k)`, the lower bound on `v_L(x_{n-i})`.
pub fn step_bound(s: u64, p: u64, i: u32) -> u64 {
    partial_bound(s, p, i).ceil().to_integer().to_u64().expect("small bound")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::{BuildOptions, TowerInput};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn over_qp(p: u64, el: &[i64], n: u32) -> Tower {
        let e_l = el.iter().map(|&c| vec![BigInt::from(c)]).collect();
        Tower::build(TowerInput { p, e_k: None, e_l }, n, BuildOptions::default()).unwrap()
    }

    fn q2i() -> Tower {
        over_qp(2, &[2, -2, 1], 16)
    }

    fn i_of(t: &Tower) -> OElem {
        t.sub(&t.pi_l(), &t.top_one())
    }

    #[test]
    fn compute_m_examples() {
        assert_eq!(compute_m(1, 2), 2);
        assert_eq!(compute_m(2, 2), 3);
        assert_eq!(compute_m(1, 3), 2);
        for p in 2..=7 {
            for s in 1..=30 {
                assert_eq!(compute_m(s, p), compute_m_closed(s, p));
            }
        }
    }

    #[test]
    fn step_bound_examples() {
        assert_eq!(step_bound(2, 2, 1), 1);
        assert_eq!(step_bound(2, 2, 2), 2);
        assert_eq!(step_bound(1, 2, 1), 1);
    }

    #[test]
    fn trace_of_i() {
        let t = q2i();
        let ctx = WittCtx::new(2, 1).unwrap();
        let x = WittVec::new(vec![i_of(&t)]);
        assert!(is_zero_vec(&witt_trace(&t, &ctx, &x).unwrap()));
        let zero = ctx.zero(&TopRing(&t));
        assert!(is_zero_vec(&witt_trace(&t, &ctx, &zero).unwrap()));
    }

    #[test]
    fn coboundaries_are_trace_zero() {
        let t = q2i();
        let ctx = WittCtx::new(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in 0..20 {
            let k = sample_coboundary(&t, &ctx, &mut rng, s).unwrap();
            assert!(is_zero_vec(&k.residual));
        }
    }

    #[test]
    fn sampler_level_one_is_the_kernel() {
        let t = q2i();
        let ctx = WittCtx::new(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let i = i_of(&t);
        for s in 0..20 {
            let x = sample_trace_zero(&t, &ctx, &mut rng, s).unwrap().vec.get(1).clone();
            // x = b i up to the precision kernel 2^(N-1), whose trace is 2^N
            let b = x.coeffs()[1];
            let d = t.sub(&x, &t.scale_int(&i, b as i64));
            assert!(d.coeffs()[0].is_multiple_of(1 << (t.precision() - 1)) && d.coeffs()[1] == 0);
        }
    }

    #[test]
    fn sampler_length_two_forces_even_multiple_of_i() {
        let t = q2i();
        let ctx = WittCtx::new(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut retried = 0;
        for s in 0..40 {
            let k = sample_trace_zero(&t, &ctx, &mut rng, s).unwrap();
            let b = k.vec.get(1).coeffs()[1];
            assert_eq!(b % 2, 0, "x1 = b i needs b even");
            retried += k.retries;
        }
        assert!(retried > 0, "odd b must be rejected at least once in 40 draws");
    }

    #[test]
    fn level_one_classes() {
        let t = q2i();
        assert!(level1_class_trivial(&t, &t.top_zero()).unwrap().is_trivial());
        let i = i_of(&t);
        assert!(matches!(level1_class_trivial(&t, &i).unwrap(), Level1Class::Nontrivial { .. }));
        match level1_class_trivial(&t, &t.scale_int(&i, 2)).unwrap() {
            Level1Class::Trivial { witness, precision } => {
                let back = t.sub(&t.galois(&witness), &witness);
                let diff = t.sub(&back, &t.scale_int(&i, 2));
                assert!(t.zero_digits(&diff) >= precision);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(level1_class_trivial(&t, &t.top_one()), Err(CohomError::NotTraceZero));
    }

    #[test]
    fn coboundaries_are_found_trivial() {
        let t = q2i();
        let ctx = WittCtx::new(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for s in 0..20 {
            let k = sample_coboundary(&t, &ctx, &mut rng, s).unwrap();
            assert!(witt_class_trivial(&t, &ctx, &k.vec, DEFAULT_SEARCH_BUDGET).is_trivial());
        }
        assert!(witt_class_trivial(&t, &ctx, &ctx.zero(&TopRing(&t)), 8).is_trivial());
    }

    #[test]
    fn h1_orders() {
        assert_eq!(h1_order_level1(&q2i()).unwrap().order_u128(), 2);
        assert_eq!(h1_order_level1(&over_qp(2, &[-2, 0, 1], 20)).unwrap().order_u128(), 2);
    }
}
