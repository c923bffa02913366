//! The residue ring Z/p^N with the modulus held in a machine word.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

/// Largest modulus accepted; leaves headroom for signed intermediate values.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Zpn {
    p: u64,
    n: u32,
    q: u64,
}

impl Zpn {
    /// `None` when `p^n` does not fit below [`MAX_MODULUS`] or `n == 0`.
    pub fn new(p: u64, n: u32) -> Option<Zpn> {
        if n == 0 || p < 2 {
            return None;
        }
        let mut q: u64 = 1;
        for _ in 0..n {
            q = q.checked_mul(p).filter(|&v| v < MAX_MODULUS)?;
        }
        Some(Zpn { p, n, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Precision in p-adic digits.
    pub fn digits(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `p^k` as an element; zero once `k >= n`.
    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.n {
            0
        } else {
            self.p.pow(k)
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        (v as i128).rem_euclid(self.q as i128) as u64
    }

    pub fn from_bigint(&self, v: &BigInt) -> u64 {
        let r = v.mod_floor(&BigInt::from(self.q));
        r.to_u64().expect("reduced residue fits")
    }

    /// Reduction of a residue modulo `p^k` for `k <= n`.
    pub fn truncate(&self, a: u64, k: u32) -> u64 {
        if k >= self.n {
            a
        } else {
            a % self.p.pow(k)
        }
    }

    /// p-adic valuation of the residue, `n` for zero.
    pub fn val(&self, a: u64) -> u32 {
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        let mut x = a;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let g = (a as i128).extended_gcd(&(self.q as i128));
        debug_assert_eq!(g.gcd, 1);
        Some(g.x.rem_euclid(self.q as i128) as u64)
    }

    /// Exact quotient `a / p^k` as a canonical residue modulo `p^(n-k)`;
    /// `None` if `p^k` does not divide `a`.
    pub fn div_p_pow(&self, a: u64, k: u32) -> Option<u64> {
        if k == 0 {
            return Some(a);
        }
        if self.val(a) < k {
            return None;
        }
        Some(a / self.p.pow(k.min(self.n)))
    }

    /// Signed representative in `(-q/2, q/2]`, handy for display.
    pub fn signed(&self, a: u64) -> i128 {
        if a > self.q / 2 {
            a as i128 - self.q as i128
        } else {
            a as i128
        }
    }

    pub fn signed_big(&self, a: u64) -> BigInt {
        BigInt::from(self.signed(a))
    }
}
