use num_bigint::BigInt;
use num_integer::Integer;
use rand::Rng;
use serde_json::json;

use super::arith::Arith;
use super::linsolve::{Mat, Smith};
use super::spec::{PrecisionSpec, TowerSpec};
use super::{LfError, Level, OElem, ValExt, Zpn};
use crate::exactpoly::Ring;
use crate::wittcore::{content_hash, is_prime};

/// Defining data of a tower, with exact integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerInput {
    pub p: u64,
    /// Eisenstein polynomial of `K` over `Q_p`, little-endian; `None` for `K = Q_p`.
    pub e_k: Option<Vec<BigInt>>,
    /// Eisenstein polynomial of `L` over `O_K`; coefficient `j` is an element of
    /// `O_K` in the basis `1, pi_K, ...`.
    pub e_l: Vec<Vec<BigInt>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Which non-identity root (in canonical order) defines the generator.
    pub root_choice: usize,
}

/// Result of a linear solve lifted back to tower elements.
#[derive(Clone, Debug)]
pub struct TraceSolution {
    pub x: OElem,
    pub free_kernel: Vec<OElem>,
    pub precision_kernel: Vec<OElem>,
    /// Digits to which the equation holds.
    pub precision: u32,
}

/// Smallest `N` with `p e_K N >= 2 n (s + e_L) + 8`.
pub fn auto_precision(p: u64, e_k: u64, s: u64, n: u64) -> u32 {
    let e_l = p * e_k;
    let need = 2 * n * (s + e_l) + 8;
    need.div_ceil(e_l) as u32
}

/// An immutable tower `Q_p ⊆ K ⊆ L` at precision `p^N` together with a
/// generator of `Gal(L/K)` and the factorized trace and `sigma - 1` maps.
#[derive(Clone, Debug)]
pub struct Tower {
    input: TowerInput,
    p: u64,
    ar: Arith,
    sigma_root: OElem,
    other_roots: Vec<OElem>,
    root_choice: usize,
    sigma: Mat,
    trace_mat: Mat,
    sigma_minus_one: Mat,
    trace_smith: Smith,
    sms_smith: Smith,
    d: u64,
    s: u64,
    hash: String,
}

fn base_from_poly(ar: &Arith, cs: &[BigInt]) -> Vec<u64> {
    let z = &ar.z;
    let mut pk = vec![0u64; ar.e];
    pk[0] = 1;
    let pi_k = pi_k_coeffs(ar);
    let mut acc = vec![0u64; ar.e];
    for c in cs {
        let term: Vec<u64> = pk.iter().map(|&x| z.mul(x, z.from_bigint(c))).collect();
        acc = ar.base_add(&acc, &term);
        pk = ar.base_mul(&pk, &pi_k);
    }
    acc
}

fn pi_k_coeffs(ar: &Arith) -> Vec<u64> {
    let mut c = vec![0u64; ar.e];
    if ar.e == 1 {
        // K = Q_p presented by x - p
        c[0] = ar.z.neg(ar.ek_tail[0]);
    } else {
        c[1] = 1;
    }
    c
}

fn check_eisenstein_k(p: u64, ek: &[BigInt]) -> Result<(), LfError> {
    let bad = |reason: &str| LfError::NotEisenstein { which: "E_K", reason: reason.into() };
    if ek.len() < 2 {
        return Err(bad("degree must be at least 1"));
    }
    if ek.last() != Some(&BigInt::from(1)) {
        return Err(bad("leading coefficient must be 1"));
    }
    let pb = BigInt::from(p);
    if ek[..ek.len() - 1].iter().any(|c| !c.is_multiple_of(&pb)) {
        return Err(bad("non-leading coefficients must be divisible by p"));
    }
    if ek[0].is_multiple_of(&(&pb * &pb)) {
        return Err(bad("constant term must have valuation exactly 1"));
    }
    Ok(())
}

fn make_arith(input: &TowerInput, z: Zpn) -> Arith {
    let p = input.p;
    let (e, ek_tail) = match &input.e_k {
        None => (1, vec![z.from_i64(-(p as i64))]),
        Some(ek) => (ek.len() - 1, ek[..ek.len() - 1].iter().map(|c| z.from_bigint(c)).collect()),
    };
    let mut ar = Arith { z, e, deg: p as usize, ek_tail, el_tail: Vec::new() };
    ar.el_tail = input.e_l[..p as usize].iter().map(|c| base_from_poly(&ar, c)).collect();
    ar
}

impl Tower {
    pub fn build(input: TowerInput, n: u32, opts: BuildOptions) -> Result<Tower, LfError> {
        let p = input.p;
        if !is_prime(p) {
            return Err(LfError::Unsupported(format!("{p} is not prime")));
        }
        if let Some(ek) = &input.e_k {
            check_eisenstein_k(p, ek)?;
        }
        let z = Zpn::new(p, n)
            .ok_or_else(|| LfError::Unsupported(format!("{p}^{n} does not fit the residue word")))?;
        if n < 2 {
            return Err(LfError::PrecisionTooLow { val_cap: n as u64, needed: 2 });
        }
        if input.e_l.len() != p as usize + 1 {
            return Err(LfError::NotEisenstein {
                which: "E_L",
                reason: format!("degree must be p = {p}"),
            });
        }
        let ar = make_arith(&input, z);
        let e_l = (ar.e * ar.deg) as u64;
        let cap = ar.top_cap();

        let lead = base_from_poly(&ar, &input.e_l[p as usize]);
        if lead != ar.base_from_i64(1) {
            return Err(LfError::NotEisenstein { which: "E_L", reason: "leading coefficient must be 1".into() });
        }
        for (j, c) in ar.el_tail.iter().enumerate() {
            let v = ar.base_val(c);
            if j == 0 && v != Some(1) {
                return Err(LfError::NotEisenstein {
                    which: "E_L",
                    reason: "constant term must have valuation exactly 1".into(),
                });
            }
            if v == Some(0) {
                return Err(LfError::NotEisenstein {
                    which: "E_L",
                    reason: format!("coefficient {j} is a unit"),
                });
            }
        }

        // d = v_L(E_L'(pi_L)) = (p - 1)(s + 1) for a Galois extension
        let deriv = derivative(&ar);
        let pi = ar.top_pi();
        let d = ar
            .top_val(&ar.eval_top_poly(&deriv, &pi))
            .ok_or(LfError::PrecisionTooLow { val_cap: cap, needed: cap + 1 })?;
        if cap < d + 2 {
            return Err(LfError::PrecisionTooLow { val_cap: cap, needed: d + 2 });
        }

        let work_digits = n + (d.div_ceil(e_l) as u32) + 1;
        let zw = Zpn::new(p, work_digits).ok_or_else(|| {
            LfError::Unsupported(format!("working precision {p}^{work_digits} does not fit the residue word"))
        })?;
        let arw = make_arith(&input, zw);
        let lifted = lift_roots(&arw, d, (e_l * n as u64) as usize)?;
        if lifted.len() != p as usize {
            return Err(LfError::NotNormal { found: lifted.len(), expected: p as usize });
        }
        let mut roots: Vec<Vec<u64>> = lifted
            .into_iter()
            .map(|r| r.into_iter().map(|c| zw.truncate(c, n)).collect())
            .collect();
        let ident = roots.iter().position(|r| *r == pi).ok_or_else(|| {
            LfError::Inconsistent("the defining uniformizer is not among the lifted roots".into())
        })?;
        roots.remove(ident);
        roots.sort();
        roots.dedup();
        if roots.len() != p as usize - 1 {
            return Err(LfError::NotNormal { found: roots.len() + 1, expected: p as usize });
        }
        let choice = opts.root_choice;
        if choice >= roots.len() {
            return Err(LfError::Unsupported(format!("root choice {choice} out of range")));
        }

        let el_full: Vec<Vec<u64>> = input.e_l.iter().map(|c| base_from_poly(&ar, c)).collect();
        for r in &roots {
            if ar.eval_top_poly(&el_full, r).iter().any(|&c| c != 0) {
                return Err(LfError::Inconsistent("lifted root is not a root at precision".into()));
            }
        }
        let r = roots[choice].clone();

        // sigma on the flat basis pi_L^j pi_K^k
        let len = ar.top_len();
        let pi_k = pi_k_coeffs(&ar);
        let mut cols = Vec::with_capacity(len);
        let mut rj = ar.top_from_base(&ar.base_from_i64(1));
        for _ in 0..ar.deg {
            let mut pk = ar.base_from_i64(1);
            for _ in 0..ar.e {
                cols.push(ar.top_scale(&rj, &pk));
                pk = ar.base_mul(&pk, &pi_k);
            }
            rj = ar.top_mul(&rj, &r);
        }
        let sigma = Mat::from_cols(len, &cols);

        let mut x = pi.clone();
        for _ in 0..p {
            x = sigma.apply(&z, &x);
        }
        if x != pi {
            return Err(LfError::Inconsistent("sigma does not have order p".into()));
        }

        let vals: Vec<u64> = roots
            .iter()
            .map(|root| ar.top_val(&ar.base_sub(root, &pi)).unwrap_or(cap))
            .collect();
        let v = vals[choice];
        if vals.iter().any(|&w| w != v) || v >= cap {
            return Err(LfError::Inconsistent("conjugates are not equidistant from pi_L".into()));
        }
        if d != (p - 1) * v {
            return Err(LfError::Inconsistent(format!(
                "different valuation {d} disagrees with (p-1) v_L(sigma pi - pi) = {}",
                (p - 1) * v
            )));
        }
        let s = v - 1;
        if s < 1 {
            return Err(LfError::Inconsistent("ramification break below 1".into()));
        }

        // trace as the sum of the powers of sigma
        let mut power = Mat::identity(len);
        let mut total = Mat::identity(len);
        for _ in 1..p {
            power = sigma.mul(&z, &power);
            for i in 0..len {
                for j in 0..len {
                    total.set(i, j, z.add(total.get(i, j), power.get(i, j)));
                }
            }
        }
        for i in ar.e..len {
            if (0..len).any(|j| total.get(i, j) != 0) {
                return Err(LfError::TraceNotRational);
            }
        }
        let trace_mat = Mat::from_rows(
            (0..ar.e).map(|i| (0..len).map(|j| total.get(i, j)).collect()).collect(),
        );
        let mut sigma_minus_one = sigma.clone();
        for i in 0..len {
            sigma_minus_one.set(i, i, z.sub(sigma.get(i, i), 1));
        }
        let trace_smith = Smith::factor(z, &trace_mat);
        let sms_smith = Smith::factor(z, &sigma_minus_one);

        let hash = tower_hash(&input, n);
        Ok(Tower {
            input,
            p,
            sigma_root: OElem::new(Level::Top, r),
            other_roots: roots.into_iter().map(|c| OElem::new(Level::Top, c)).collect(),
            root_choice: choice,
            ar,
            sigma,
            trace_mat,
            sigma_minus_one,
            trace_smith,
            sms_smith,
            d,
            s,
            hash,
        })
    }

    /// Builds from a description; `"auto"` precision is resolved for Witt
    /// length `n` once the ramification break is known.
    pub fn from_spec(spec: &TowerSpec, n: usize, opts: BuildOptions) -> Result<Tower, LfError> {
        let input = spec.input();
        match spec.precision {
            PrecisionSpec::Digits(d) => Tower::build(input, d, opts),
            PrecisionSpec::Auto => {
                let mut trial = 8;
                let probe = loop {
                    match Tower::build(input.clone(), trial, opts) {
                        Ok(t) => break t,
                        Err(LfError::PrecisionTooLow { .. }) if trial < 64 => trial *= 2,
                        Err(e) => return Err(e),
                    }
                };
                let e_k = probe.e_k() as u64;
                let want = auto_precision(spec.p, e_k, probe.s(), n as u64).max(2);
                if want == trial {
                    Ok(probe)
                } else {
                    Tower::build(input, want, opts)
                }
            }
        }
    }

    /// The same tower at another precision, with the same root choice.
    pub fn at_precision(&self, n: u32) -> Result<Tower, LfError> {
        Tower::build(self.input.clone(), n, BuildOptions { root_choice: self.root_choice })
    }

    /// The same tower with a different generator.
    pub fn with_root_choice(&self, choice: usize) -> Result<Tower, LfError> {
        Tower::build(self.input.clone(), self.precision(), BuildOptions { root_choice: choice })
    }

    pub fn input(&self) -> &TowerInput {
        &self.input
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `N`, the number of p-adic digits carried.
    pub fn precision(&self) -> u32 {
        self.ar.z.digits()
    }

    pub fn zpn(&self) -> Zpn {
        self.ar.z
    }

    pub fn e_k(&self) -> usize {
        self.ar.e
    }

    pub fn e_l(&self) -> usize {
        self.ar.e * self.ar.deg
    }

    /// Number of flat coefficients of a top element.
    pub fn top_len(&self) -> usize {
        self.ar.top_len()
    }

    /// Ramification break `v_L(sigma pi_L - pi_L) - 1`.
    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn ramification_break(&self) -> u64 {
        self.s
    }

    /// `v_L` of the derivative of the top polynomial at `pi_L`.
    pub fn different_valuation(&self) -> u64 {
        self.d
    }

    /// Largest `v_L` value decidable at this precision.
    pub fn val_cap(&self) -> u64 {
        self.ar.top_cap()
    }

    /// Largest `v_K` value decidable at this precision.
    pub fn val_cap_k(&self) -> u64 {
        self.ar.base_cap()
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn root_choice(&self) -> usize {
        self.root_choice
    }

    pub fn sigma_root(&self) -> &OElem {
        &self.sigma_root
    }

    /// All non-identity roots of the top polynomial, in canonical order.
    pub fn other_roots(&self) -> &[OElem] {
        &self.other_roots
    }

    pub fn sigma_matrix(&self) -> &Mat {
        &self.sigma
    }

    pub fn trace_matrix(&self) -> &Mat {
        &self.trace_mat
    }

    pub fn sigma_minus_one_matrix(&self) -> &Mat {
        &self.sigma_minus_one
    }

    pub fn trace_smith(&self) -> &Smith {
        &self.trace_smith
    }

    pub fn sigma_minus_one_smith(&self) -> &Smith {
        &self.sms_smith
    }

    /// Precision lost solving against the trace and against `sigma - 1`.
    pub fn delta(&self) -> u32 {
        self.trace_smith.delta().max(self.sms_smith.delta())
    }

    // ---- elements ----

    pub fn top_from_coeffs(&self, coeffs: Vec<u64>) -> OElem {
        assert_eq!(coeffs.len(), self.top_len());
        let z = self.zpn();
        OElem::new(Level::Top, coeffs.into_iter().map(|c| z.truncate(c, z.digits())).collect())
    }

    pub fn base_from_coeffs(&self, coeffs: Vec<u64>) -> OElem {
        assert_eq!(coeffs.len(), self.e_k());
        OElem::new(Level::Base, coeffs)
    }

    pub fn top_from_i64(&self, v: i64) -> OElem {
        OElem::new(Level::Top, self.ar.top_from_base(&self.ar.base_from_i64(v)))
    }

    pub fn base_from_i64(&self, v: i64) -> OElem {
        OElem::new(Level::Base, self.ar.base_from_i64(v))
    }

    pub fn top_zero(&self) -> OElem {
        self.top_from_i64(0)
    }

    pub fn top_one(&self) -> OElem {
        self.top_from_i64(1)
    }

    pub fn base_zero(&self) -> OElem {
        self.base_from_i64(0)
    }

    pub fn pi_l(&self) -> OElem {
        OElem::new(Level::Top, self.ar.top_pi())
    }

    pub fn pi_k(&self) -> OElem {
        OElem::new(Level::Base, pi_k_coeffs(&self.ar))
    }

    /// `pi_L^k`.
    pub fn pi_l_pow(&self, k: u64) -> OElem {
        TopRing(self).pow(&self.pi_l(), k)
    }

    pub fn embed(&self, a: &OElem) -> OElem {
        match a.level {
            Level::Top => a.clone(),
            Level::Base => OElem::new(Level::Top, self.ar.top_from_base(&a.coeffs)),
        }
    }

    /// The base element a top element equals, if its higher coefficients vanish.
    pub fn base_part(&self, a: &OElem) -> Option<OElem> {
        match a.level {
            Level::Base => Some(a.clone()),
            Level::Top => {
                let e = self.e_k();
                a.coeffs[e..]
                    .iter()
                    .all(|&c| c == 0)
                    .then(|| OElem::new(Level::Base, a.coeffs[..e].to_vec()))
            }
        }
    }

    /// Whether the `pi_L^(>=1)` coefficients vanish modulo `p^digits`.
    pub fn in_base_mod(&self, a: &OElem, digits: u32) -> bool {
        let z = self.zpn();
        match a.level {
            Level::Base => true,
            Level::Top => a.coeffs[self.e_k()..].iter().all(|&c| z.truncate(c, digits) == 0),
        }
    }

    /// Number of low p-adic digits in which every coefficient vanishes.
    pub fn zero_digits(&self, a: &OElem) -> u32 {
        let z = self.zpn();
        a.coeffs.iter().map(|&c| z.val(c)).min().unwrap_or(z.digits())
    }

    pub fn random_top<R: Rng + ?Sized>(&self, rng: &mut R) -> OElem {
        let q = self.zpn().modulus();
        OElem::new(Level::Top, (0..self.top_len()).map(|_| rng.gen_range(0..q)).collect())
    }

    pub fn random_base<R: Rng + ?Sized>(&self, rng: &mut R) -> OElem {
        let q = self.zpn().modulus();
        OElem::new(Level::Base, (0..self.e_k()).map(|_| rng.gen_range(0..q)).collect())
    }

    /// Uniform random unit of `O_L`.
    pub fn random_top_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> OElem {
        let z = self.zpn();
        let mut a = self.random_top(rng);
        while !z.is_unit(a.coeffs[0]) {
            a.coeffs[0] = rng.gen_range(0..z.modulus());
        }
        a
    }

    fn lift2(&self, a: &OElem, b: &OElem) -> (Level, Vec<u64>, Vec<u64>) {
        if a.level == b.level {
            (a.level, a.coeffs.clone(), b.coeffs.clone())
        } else {
            (Level::Top, self.embed(a).coeffs, self.embed(b).coeffs)
        }
    }

    pub fn add(&self, a: &OElem, b: &OElem) -> OElem {
        let (lv, x, y) = self.lift2(a, b);
        OElem::new(lv, self.ar.base_add(&x, &y))
    }

    pub fn sub(&self, a: &OElem, b: &OElem) -> OElem {
        let (lv, x, y) = self.lift2(a, b);
        OElem::new(lv, self.ar.base_sub(&x, &y))
    }

    pub fn neg(&self, a: &OElem) -> OElem {
        OElem::new(a.level, self.ar.vec_neg(&a.coeffs))
    }

    pub fn mul(&self, a: &OElem, b: &OElem) -> OElem {
        match (a.level, b.level) {
            (Level::Base, Level::Base) => OElem::new(Level::Base, self.ar.base_mul(&a.coeffs, &b.coeffs)),
            (Level::Top, Level::Top) => OElem::new(Level::Top, self.ar.top_mul(&a.coeffs, &b.coeffs)),
            (Level::Top, Level::Base) => OElem::new(Level::Top, self.ar.top_scale(&a.coeffs, &b.coeffs)),
            (Level::Base, Level::Top) => OElem::new(Level::Top, self.ar.top_scale(&b.coeffs, &a.coeffs)),
        }
    }

    pub fn scale_int(&self, a: &OElem, k: i64) -> OElem {
        let z = self.zpn();
        let f = z.from_i64(k);
        OElem::new(a.level, a.coeffs.iter().map(|&c| z.mul(c, f)).collect())
    }

    /// The generator: `pi_L -> sigma_root`, identity on `O_K`.
    pub fn galois(&self, a: &OElem) -> OElem {
        match a.level {
            Level::Base => a.clone(),
            Level::Top => OElem::new(Level::Top, self.sigma.apply(&self.zpn(), &a.coeffs)),
        }
    }

    pub fn galois_pow(&self, a: &OElem, k: usize) -> OElem {
        let mut x = a.clone();
        for _ in 0..k % self.p as usize {
            x = self.galois(&x);
        }
        x
    }

    /// `a, sigma a, ..., sigma^(p-1) a`.
    pub fn conjugates(&self, a: &OElem) -> Vec<OElem> {
        let mut out = Vec::with_capacity(self.p as usize);
        let mut x = a.clone();
        for _ in 0..self.p {
            let next = self.galois(&x);
            out.push(x);
            x = next;
        }
        out
    }

    /// `sum_i sigma^i a`, checked to lie in `O_K`.
    pub fn trace(&self, a: &OElem) -> Result<OElem, LfError> {
        let a = self.embed(a);
        let total = self
            .conjugates(&a)
            .iter()
            .fold(self.top_zero(), |acc, x| self.add(&acc, x));
        self.base_part(&total).ok_or(LfError::TraceNotRational)
    }

    /// `v_L` for top elements, `v_K` for base elements.
    pub fn valuation(&self, a: &OElem) -> ValExt {
        match a.level {
            Level::Top => self.ar.top_val(&a.coeffs).map_or(ValExt::AtLeastCap(self.val_cap()), ValExt::Finite),
            Level::Base => self.ar.base_val(&a.coeffs).map_or(ValExt::AtLeastCap(self.val_cap_k()), ValExt::Finite),
        }
    }

    /// `v_L` of an element of either level.
    pub fn v_l(&self, a: &OElem) -> ValExt {
        self.valuation(&self.embed(a))
    }

    /// `v_K` of a base element (or a top element lying in `O_K`).
    pub fn v_k(&self, a: &OElem) -> Result<ValExt, LfError> {
        let b = self.base_part(a).ok_or(LfError::TraceNotRational)?;
        Ok(self.valuation(&b))
    }

    fn tops(&self, vs: Vec<Vec<u64>>) -> Vec<OElem> {
        vs.into_iter().map(|c| OElem::new(Level::Top, c)).collect()
    }

    /// Solves `tr(x) = c` for `x` in `O_L`.
    pub fn solve_trace_eq(&self, c: &OElem) -> Result<TraceSolution, LfError> {
        let c = self.base_part(c).ok_or(LfError::TraceNotRational)?;
        let sol = self.trace_smith.solve(&c.coeffs)?;
        Ok(TraceSolution {
            x: OElem::new(Level::Top, sol.x),
            free_kernel: self.tops(sol.free_kernel),
            precision_kernel: self.tops(sol.precision_kernel),
            precision: sol.precision,
        })
    }

    /// Solves `(sigma - 1) y = c`. Rows without a pivot are checked modulo
    /// `p^(N - delta)`; that is the precision of the witness.
    pub fn solve_sigma_minus_one(&self, c: &OElem) -> Result<TraceSolution, LfError> {
        self.solve_sigma_minus_one_checked(c, self.precision().saturating_sub(self.delta()))
    }

    /// As [`Tower::solve_sigma_minus_one`] with an explicit check precision
    /// for the rows without a pivot.
    pub fn solve_sigma_minus_one_checked(&self, c: &OElem, check: u32) -> Result<TraceSolution, LfError> {
        let c = self.embed(c);
        let sol = self.sms_smith.solve_checked(&c.coeffs, check)?;
        Ok(TraceSolution {
            x: OElem::new(Level::Top, sol.x),
            free_kernel: self.tops(sol.free_kernel),
            precision_kernel: self.tops(sol.precision_kernel),
            precision: sol.precision,
        })
    }

    /// Human-readable summary of the tower.
    pub fn info(&self) -> serde_json::Value {
        let z = self.zpn();
        json!({
            "p": self.p,
            "N": self.precision(),
            "e_K": self.e_k(),
            "e_L": self.e_l(),
            "s": self.s,
            "different_valuation": self.d,
            "val_cap": self.val_cap(),
            "sigma_root": self.sigma_root.coeffs.iter().map(|&c| z.signed(c).to_string()).collect::<Vec<_>>(),
            "trace_pivots": self.trace_smith.pivots(),
            "sigma_minus_one_pivots": self.sms_smith.pivots(),
            "delta": self.delta(),
            "tower_hash": self.hash,
        })
    }
}

fn derivative(ar: &Arith) -> Vec<Vec<u64>> {
    let z = &ar.z;
    let mut out = Vec::with_capacity(ar.deg);
    for j in 1..=ar.deg {
        let c = if j == ar.deg { ar.base_from_i64(1) } else { ar.el_tail[j].clone() };
        out.push(c.iter().map(|&x| z.mul(x, z.from_i64(j as i64))).collect());
    }
    out
}

/// Digit-by-digit search for the roots of the top polynomial modulo
/// `pi_L^digits`. A residue `r mod pi^k` is kept iff
/// `v(E(r)) >= k + min((p-1) k, d)`, which holds exactly for the
/// reductions of true roots when the roots are pairwise at distance `d/(p-1)`.
fn lift_roots(arw: &Arith, d: u64, digits: usize) -> Result<Vec<Vec<u64>>, LfError> {
    let z = &arw.z;
    let p = arw.deg as u64;
    let mut full: Vec<Vec<u64>> = arw.el_tail.clone();
    full.push(arw.base_from_i64(1));
    let pi = arw.top_pi();
    let mut pow = arw.top_from_base(&arw.base_from_i64(1));
    let mut cands = vec![vec![0u64; arw.top_len()]];
    for k in 0..digits {
        let kk = (k + 1) as u64;
        let target = kk + ((p - 1) * kk).min(d);
        let mut next = Vec::new();
        for r in &cands {
            for a in 0..p {
                let step: Vec<u64> = pow.iter().map(|&c| z.mul(c, a)).collect();
                let cand = arw.base_add(r, &step);
                let v = arw.top_val(&arw.eval_top_poly(&full, &cand)).unwrap_or(arw.top_cap());
                if v >= target {
                    next.push(cand);
                }
            }
        }
        if next.is_empty() || next.len() > p as usize {
            return Err(LfError::NotNormal { found: next.len().min(p as usize - 1), expected: p as usize });
        }
        cands = next;
        pow = arw.top_mul(&pow, &pi);
    }
    Ok(cands)
}

fn tower_hash(input: &TowerInput, n: u32) -> String {
    let strs = |cs: &[BigInt]| cs.iter().map(|c| c.to_string()).collect::<Vec<_>>();
    let body = json!({
        "p": input.p,
        "N": n,
        "E_K": input.e_k.as_ref().map(|c| strs(c)),
        "E_L": input.e_l.iter().map(|c| strs(c)).collect::<Vec<_>>(),
    });
    content_hash(body.to_string().as_bytes())
}

/// `O_L / p^N` as a [`Ring`], for Witt vector arithmetic.
#[derive(Clone, Copy, Debug)]
pub struct TopRing<'a>(pub &'a Tower);

/// `O_K / p^N` as a [`Ring`].
#[derive(Clone, Copy, Debug)]
pub struct BaseRing<'a>(pub &'a Tower);

impl Ring for TopRing<'_> {
    type Elem = OElem;

    fn zero(&self) -> OElem {
        self.0.top_zero()
    }
    fn one(&self) -> OElem {
        self.0.top_one()
    }
    fn add(&self, a: &OElem, b: &OElem) -> OElem {
        self.0.add(a, b)
    }
    fn neg(&self, a: &OElem) -> OElem {
        self.0.neg(a)
    }
    fn sub(&self, a: &OElem, b: &OElem) -> OElem {
        self.0.sub(a, b)
    }
    fn mul(&self, a: &OElem, b: &OElem) -> OElem {
        self.0.mul(a, b)
    }
    fn is_zero(&self, a: &OElem) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, n: i64) -> OElem {
        self.0.top_from_i64(n)
    }
    fn from_int(&self, n: &BigInt) -> OElem {
        let z = self.0.zpn();
        let mut c = vec![0; self.0.top_len()];
        c[0] = z.from_bigint(n);
        OElem::new(Level::Top, c)
    }
}

impl Ring for BaseRing<'_> {
    type Elem = OElem;

    fn zero(&self) -> OElem {
        self.0.base_zero()
    }
    fn one(&self) -> OElem {
        self.0.base_from_i64(1)
    }
    fn add(&self, a: &OElem, b: &OElem) -> OElem {
        self.0.add(a, b)
    }
    fn neg(&self, a: &OElem) -> OElem {
        self.0.neg(a)
    }
    fn sub(&self, a: &OElem, b: &OElem) -> OElem {
        self.0.sub(a, b)
    }
    fn mul(&self, a: &OElem, b: &OElem) -> OElem {
        self.0.mul(a, b)
    }
    fn is_zero(&self, a: &OElem) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, n: i64) -> OElem {
        self.0.base_from_i64(n)
    }
    fn from_int(&self, n: &BigInt) -> OElem {
        let z = self.0.zpn();
        let mut c = vec![0; self.0.e_k()];
        c[0] = z.from_bigint(n);
        OElem::new(Level::Base, c)
    }
}
