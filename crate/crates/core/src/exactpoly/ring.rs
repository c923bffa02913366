use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::MPoly;

/// A commutative ring with unit whose elements need a runtime context
/// (a modulus, a defining polynomial, ...) to be combined.
pub trait Ring {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    /// Image of an integer under the unique ring map from Z: `n` copies of the
    /// unit, computed by doubling.
    #[allow(clippy::wrong_self_convention)]
    fn from_int(&self, n: &BigInt) -> Self::Elem {
        let mut acc = self.zero();
        let mut base = self.one();
        let mut k = n.abs();
        while !k.is_zero() {
            if (&k & BigInt::one()).is_one() {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        if n.is_negative() {
            self.neg(&acc)
        } else {
            acc
        }
    }

    #[allow(clippy::wrong_self_convention)]
    fn from_i64(&self, n: i64) -> Self::Elem {
        self.from_int(&BigInt::from(n))
    }

    fn pow(&self, a: &Self::Elem, mut k: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// The integers.
#[derive(Clone, Copy, Debug, Default)]
pub struct Integers;

impl Ring for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn from_int(&self, n: &BigInt) -> BigInt {
        n.clone()
    }
    fn from_i64(&self, n: i64) -> BigInt {
        BigInt::from(n)
    }
}

/// Integers modulo an arbitrary positive modulus, held as canonical
/// representatives in `[0, m)`.
#[derive(Clone, Debug)]
pub struct IntegersMod {
    modulus: BigInt,
}

impl IntegersMod {
    pub fn new(modulus: BigInt) -> Self {
        assert!(modulus.is_positive(), "modulus must be positive");
        IntegersMod { modulus }
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn reduce(&self, a: &BigInt) -> BigInt {
        let r = a % &self.modulus;
        if r.is_negative() {
            r + &self.modulus
        } else {
            r
        }
    }
}

impl Ring for IntegersMod {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        self.reduce(&BigInt::one())
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(&(a + b))
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        self.reduce(&-a)
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(&(a * b))
    }
    fn from_int(&self, n: &BigInt) -> BigInt {
        self.reduce(n)
    }
    fn from_i64(&self, n: i64) -> BigInt {
        self.reduce(&BigInt::from(n))
    }
}

/// Z[v0, v1, ...] itself; evaluating a polynomial over this ring is
/// substitution of polynomials for variables.
#[derive(Clone, Copy, Debug, Default)]
pub struct PolyRing;

impl Ring for PolyRing {
    type Elem = MPoly;

    fn zero(&self) -> MPoly {
        MPoly::zero()
    }
    fn one(&self) -> MPoly {
        MPoly::one()
    }
    fn add(&self, a: &MPoly, b: &MPoly) -> MPoly {
        a.add(b)
    }
    fn neg(&self, a: &MPoly) -> MPoly {
        a.neg()
    }
    fn sub(&self, a: &MPoly, b: &MPoly) -> MPoly {
        a.sub(b)
    }
    fn mul(&self, a: &MPoly, b: &MPoly) -> MPoly {
        a.mul(b)
    }
    fn is_zero(&self, a: &MPoly) -> bool {
        a.is_zero()
    }
    fn from_int(&self, n: &BigInt) -> MPoly {
        MPoly::constant(n.clone())
    }
}

/// Small-coefficient fast path used by evaluation.
pub(crate) fn coeff_into<R: Ring>(ring: &R, c: &BigInt) -> R::Elem {
    match c.to_i64() {
        Some(v) => ring.from_i64(v),
        None => ring.from_int(c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_from_int_is_repeated_unit() {
        // a ring that only overrides the structural operations
        struct Mod8;
        impl Ring for Mod8 {
            type Elem = u8;
            fn zero(&self) -> u8 {
                0
            }
            fn one(&self) -> u8 {
                1
            }
            fn add(&self, a: &u8, b: &u8) -> u8 {
                (a + b) % 8
            }
            fn neg(&self, a: &u8) -> u8 {
                (8 - a) % 8
            }
            fn mul(&self, a: &u8, b: &u8) -> u8 {
                (a * b) % 8
            }
        }
        assert_eq!(Mod8.from_int(&BigInt::from(13)), 5);
        assert_eq!(Mod8.from_int(&BigInt::from(-3)), 5);
        assert_eq!(Mod8.from_int(&BigInt::from(0)), 0);
        assert_eq!(Mod8.pow(&3, 2), 1);
    }

    #[test]
    fn integers_mod_canonical() {
        let r = IntegersMod::new(BigInt::from(8));
        assert_eq!(r.from_i64(-1), BigInt::from(7));
        assert_eq!(r.mul(&BigInt::from(3), &BigInt::from(7)), BigInt::from(5));
    }
}
