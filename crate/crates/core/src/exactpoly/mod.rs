//! Sparse multivariate polynomials over the integers.
//!
//! Polynomials are canonical maps from [`Monomial`] to nonzero [`BigInt`]
//! coefficients, kept in graded lexicographic order so that iteration and
//! serialization are deterministic. Evaluation works over any [`Ring`],
//! which is how the integral Witt polynomials are pushed into Z/p^N,
//! rings of integers, or back into polynomial rings for composition.

mod json;
mod monomial;
mod ring;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use json::PolyJsonError;
pub use monomial::{Monomial, Var};
pub use ring::{Integers, IntegersMod, PolyRing, Ring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("coefficient {coefficient} of {monomial} is not divisible by {divisor}")]
    NotDivisible {
        monomial: Monomial,
        coefficient: BigInt,
        divisor: BigInt,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("variable v{0} has no assigned value")]
    UnassignedVariable(Var),
}

/// Total degree with a point at infinity, used for the degree of the zero
/// polynomial's lowest term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    Finite(u32),
    Infinite,
}

impl Degree {
    pub fn at_least(self, bound: u32) -> bool {
        match self {
            Degree::Finite(d) => d >= bound,
            Degree::Infinite => true,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Finite(d) => write!(f, "{d}"),
            Degree::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct MPoly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn one() -> Self {
        MPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        MPoly::monomial(Monomial::one(), c)
    }

    pub fn var(v: Var) -> Self {
        MPoly::monomial(Monomial::var(v), BigInt::one())
    }

    pub fn monomial(m: Monomial, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigInt)>>(terms: I) -> Self {
        let mut p = MPoly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> MPoly {
        if k.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        if self.is_zero() || other.is_zero() {
            return MPoly::zero();
        }
        let mut acc: HashMap<Monomial, BigInt> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(ma.mul(mb)).or_default() += ca * cb;
            }
        }
        MPoly {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, mut k: u64) -> MPoly {
        if k == 0 {
            return MPoly::one();
        }
        // (single term)^k needs no expansion
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let k32 = u32::try_from(k).expect("exponent overflow");
            return MPoly::monomial(m.pow(k32), num_traits::pow(c.clone(), k as usize));
        }
        let mut acc = MPoly::one();
        let mut base = self.clone();
        loop {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.mul(&base);
        }
        acc
    }

    /// Divides every coefficient by `k`, failing on the first coefficient
    /// that is not a multiple. Success certifies integrality of `self / k`.
    pub fn exact_div_int(&self, k: &BigInt) -> Result<MPoly, PolyError> {
        if k.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return Err(PolyError::NotDivisible {
                    monomial: m.clone(),
                    coefficient: c.clone(),
                    divisor: k.clone(),
                });
            }
            terms.insert(m.clone(), q);
        }
        Ok(MPoly { terms })
    }

    pub fn total_degree(&self) -> Degree {
        match self.terms.keys().map(Monomial::degree).max() {
            Some(d) => Degree::Finite(d),
            None => Degree::Infinite,
        }
    }

    /// Smallest total degree among the stored terms; `Infinite` for zero.
    pub fn min_monomial_degree(&self) -> Degree {
        // graded order: the first key has the least degree
        match self.terms.keys().next() {
            Some(m) => Degree::Finite(m.degree()),
            None => Degree::Infinite,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn max_coeff_bits(&self) -> u64 {
        self.terms.values().map(|c| c.bits()).max().unwrap_or(0)
    }

    /// Substitution homomorphism: `values[v]` is the image of variable `v`.
    pub fn eval<R: Ring>(&self, ring: &R, values: &[R::Elem]) -> Result<R::Elem, PolyError> {
        let mut cache = PowerCache::new(ring, values);
        cache.eval(self)
    }

    /// Like [`MPoly::eval`] but with an explicit (possibly sparse) assignment.
    pub fn eval_map<R: Ring>(
        &self,
        ring: &R,
        assignment: &BTreeMap<Var, R::Elem>,
    ) -> Result<R::Elem, PolyError> {
        let max = self.vars().into_iter().max().map(|v| v as usize + 1).unwrap_or(0);
        let mut values = Vec::with_capacity(max);
        for v in 0..max as Var {
            match assignment.get(&v) {
                Some(x) => values.push(Some(x.clone())),
                None => values.push(None),
            }
        }
        let mut cache = PowerCache::sparse(ring, values);
        cache.eval(self)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn has_negative_coeff(&self) -> bool {
        self.terms.values().any(|c| c.is_negative())
    }
}

/// Evaluation context that memoizes powers of each assigned value, so that a
/// batch of polynomials over the same variables shares the work.
pub struct PowerCache<'a, R: Ring> {
    ring: &'a R,
    powers: Vec<Option<Vec<R::Elem>>>,
}

impl<'a, R: Ring> PowerCache<'a, R> {
    pub fn new(ring: &'a R, values: &[R::Elem]) -> Self {
        PowerCache {
            ring,
            powers: values.iter().map(|x| Some(vec![ring.one(), x.clone()])).collect(),
        }
    }

    fn sparse(ring: &'a R, values: Vec<Option<R::Elem>>) -> Self {
        PowerCache {
            ring,
            powers: values
                .into_iter()
                .map(|x| x.map(|x| vec![ring.one(), x]))
                .collect(),
        }
    }

    fn power(&mut self, v: Var, e: u32) -> Result<&R::Elem, PolyError> {
        let ring = self.ring;
        let table = self
            .powers
            .get_mut(v as usize)
            .and_then(|t| t.as_mut())
            .ok_or(PolyError::UnassignedVariable(v))?;
        while table.len() <= e as usize {
            let next = ring.mul(table.last().unwrap(), &table[1]);
            table.push(next);
        }
        Ok(&table[e as usize])
    }

    pub fn eval(&mut self, poly: &MPoly) -> Result<R::Elem, PolyError> {
        let ring = self.ring;
        let mut acc = ring.zero();
        for (m, c) in &poly.terms {
            let mut term = ring::coeff_into(ring, c);
            for &(v, e) in m.pairs() {
                term = ring.mul(&term, self.power(v, e)?);
            }
            acc = ring.add(&acc, &term);
        }
        Ok(acc)
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // leading term first
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        MPoly::add(self, rhs)
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        MPoly::sub(self, rhs)
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        MPoly::mul(self, rhs)
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly::neg(self)
    }
}
