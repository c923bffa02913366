//! Coefficient arithmetic for the two levels of a tower at a fixed
//! precision. Elements are flat coefficient vectors: a base element has
//! `e` coefficients in the basis `1, pi_K, ..., pi_K^(e-1)`; a top element
//! has `deg * e` coefficients, index `j*e + k` standing for `pi_L^j pi_K^k`.

use super::Zpn;

#[derive(Clone, Debug)]
pub(crate) struct Arith {
    pub z: Zpn,
    /// Ramification index of the base.
    pub e: usize,
    /// Degree of the top over the base.
    pub deg: usize,
    /// `pi_K^e = -sum ek_tail[k] pi_K^k`, i.e. the non-leading coefficients
    /// of the base polynomial.
    pub ek_tail: Vec<u64>,
    /// Non-leading coefficients of the top polynomial, each a base element.
    pub el_tail: Vec<Vec<u64>>,
}

impl Arith {
    pub fn top_len(&self) -> usize {
        self.e * self.deg
    }

    pub fn base_add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.z.add(x, y)).collect()
    }

    pub fn base_sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.z.sub(x, y)).collect()
    }

    pub fn vec_neg(&self, a: &[u64]) -> Vec<u64> {
        a.iter().map(|&x| self.z.neg(x)).collect()
    }

    pub fn base_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let z = &self.z;
        let e = self.e;
        if e == 1 {
            return vec![z.mul(a[0], b[0])];
        }
        let mut c = vec![0u64; 2 * e - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                c[i + j] = z.add(c[i + j], z.mul(x, y));
            }
        }
        for m in (e..2 * e - 1).rev() {
            let t = c[m];
            if t == 0 {
                continue;
            }
            c[m] = 0;
            for (k, &tk) in self.ek_tail.iter().enumerate() {
                c[m - e + k] = z.sub(c[m - e + k], z.mul(t, tk));
            }
        }
        c.truncate(e);
        c
    }

    pub fn top_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let e = self.e;
        let d = self.deg;
        let mut c: Vec<Vec<u64>> = vec![vec![0; e]; 2 * d - 1];
        for i in 0..d {
            let ai = &a[i * e..(i + 1) * e];
            if ai.iter().all(|&x| x == 0) {
                continue;
            }
            for j in 0..d {
                let bj = &b[j * e..(j + 1) * e];
                if bj.iter().all(|&x| x == 0) {
                    continue;
                }
                let prod = self.base_mul(ai, bj);
                c[i + j] = self.base_add(&c[i + j], &prod);
            }
        }
        for m in (d..2 * d - 1).rev() {
            let t = std::mem::replace(&mut c[m], vec![0; e]);
            if t.iter().all(|&x| x == 0) {
                continue;
            }
            for (k, tk) in self.el_tail.iter().enumerate() {
                let prod = self.base_mul(&t, tk);
                c[m - d + k] = self.base_sub(&c[m - d + k], &prod);
            }
        }
        c.truncate(d);
        c.into_iter().flatten().collect()
    }

    /// Multiplies a top element by a base element.
    pub fn top_scale(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let e = self.e;
        (0..self.deg)
            .flat_map(|j| self.base_mul(&a[j * e..(j + 1) * e], b))
            .collect()
    }

    pub fn base_from_i64(&self, v: i64) -> Vec<u64> {
        let mut c = vec![0; self.e];
        c[0] = self.z.from_i64(v);
        c
    }

    pub fn top_from_base(&self, b: &[u64]) -> Vec<u64> {
        let mut c = vec![0; self.top_len()];
        c[..self.e].copy_from_slice(b);
        c
    }

    pub fn top_pi(&self) -> Vec<u64> {
        assert!(self.deg > 1, "top level has degree at least 2");
        let mut c = vec![0; self.top_len()];
        c[self.e] = 1;
        c
    }

    /// `v_K` in units of `pi_K`; `None` if zero at precision.
    pub fn base_val(&self, a: &[u64]) -> Option<u64> {
        let e = self.e as u64;
        a.iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0)
            .map(|(k, &c)| e * self.z.val(c) as u64 + k as u64)
            .min()
    }

    /// `v_L` in units of `pi_L`; `None` if zero at precision.
    pub fn top_val(&self, a: &[u64]) -> Option<u64> {
        let e = self.e;
        (0..self.deg)
            .filter_map(|j| {
                self.base_val(&a[j * e..(j + 1) * e])
                    .map(|v| self.deg as u64 * v + j as u64)
            })
            .min()
    }

    pub fn base_cap(&self) -> u64 {
        self.e as u64 * self.z.digits() as u64
    }

    pub fn top_cap(&self) -> u64 {
        (self.e * self.deg) as u64 * self.z.digits() as u64
    }

    /// Evaluates a polynomial with base-level coefficients at a top element.
    pub fn eval_top_poly(&self, coeffs: &[Vec<u64>], x: &[u64]) -> Vec<u64> {
        let mut acc = vec![0; self.top_len()];
        for c in coeffs.iter().rev() {
            acc = self.top_mul(&acc, x);
            let cc = self.top_from_base(c);
            acc = self.base_add(&acc, &cc);
        }
        acc
    }
}
