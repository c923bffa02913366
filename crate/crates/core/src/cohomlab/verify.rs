//! Randomized verifiers. Every verifier draws its samples from per-sample
//! seeds, runs them in parallel and merges the tallies in sample order, so a
//! report depends only on the tower, the parameters and the seed.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    compute_m, conjugate_family, h1_order_level1, level1_class_trivial, sample_coboundary,
    sample_trace_zero, step_bound, CohomError, KernelSample, Level1Class,
};
use crate::exactpoly::{PowerCache, Ring};
use crate::localfield::{LfError, OElem, TopRing, Tower, ValExt};
use crate::wittcore::{binary_max_len, constant_c, pfold_decomposition, pfold_max_len, WittCtx, WittVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    Vktr,
    Vksub,
    LemmaC,
    Invariant,
    Steps,
    Main,
    FixedPoints,
}

impl LemmaId {
    pub const ALL: [LemmaId; 7] = [
        LemmaId::Vktr,
        LemmaId::Vksub,
        LemmaId::LemmaC,
        LemmaId::Invariant,
        LemmaId::Steps,
        LemmaId::Main,
        LemmaId::FixedPoints,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Vktr => "vktr",
            LemmaId::Vksub => "vksub",
            LemmaId::LemmaC => "lemma-c",
            LemmaId::Invariant => "invariant",
            LemmaId::Steps => "steps",
            LemmaId::Main => "main",
            LemmaId::FixedPoints => "fixed-points",
        }
    }

    pub fn parse(s: &str) -> Option<LemmaId> {
        LemmaId::ALL.into_iter().find(|l| l.name() == s)
    }

    /// Witt length used when none is given.
    pub fn default_len(self, p: u64) -> Option<usize> {
        match self {
            LemmaId::Vktr | LemmaId::Vksub | LemmaId::Main => None,
            LemmaId::LemmaC | LemmaId::Invariant => Some(pfold_max_len(p).min(4)),
            LemmaId::Steps => Some(binary_max_len(p).min(4)),
            LemmaId::FixedPoints => Some(binary_max_len(p).min(3)),
        }
    }
}

impl std::fmt::Display for LemmaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Undetermined,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Undetermined => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Undetermined => "UNDETERMINED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyParams {
    pub n: Option<usize>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub sample: usize,
    pub check: String,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportParams {
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<u32>,
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "N")]
    pub precision: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrecisionMeta {
    #[serde(rename = "N")]
    pub precision: u32,
    pub delta: u32,
    pub val_cap: u64,
    pub val_cap_k: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub lemma: String,
    pub tower_hash: String,
    pub params: ReportParams,
    pub status: Status,
    pub failures: Vec<Failure>,
    /// Worst observed slack `value - bound` per inequality.
    pub margins: BTreeMap<String, i64>,
    pub counts: BTreeMap<String, u64>,
    pub observations: BTreeMap<String, Value>,
    pub sign_convention: Option<String>,
    pub precision: PrecisionMeta,
    pub notes: Vec<String>,
    pub runtime_ms: Option<u64>,
}

impl VerificationReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Smallest margin over all inequalities, if any were checked.
    pub fn worst_margin(&self) -> Option<i64> {
        self.margins.values().copied().min()
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `index` of stream `stream` under the run seed.
pub fn sample_seed(seed: u64, stream: &str, index: u64) -> u64 {
    let tag = stream.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    splitmix(splitmix(seed ^ tag).wrapping_add(index))
}

#[derive(Clone, Debug, Default)]
struct Tally {
    failures: Vec<Failure>,
    margins: BTreeMap<String, i64>,
    counts: BTreeMap<String, u64>,
    undetermined: bool,
}

impl Tally {
    fn count(&mut self, key: &str) {
        *self.counts.entry(key.to_string()).or_default() += 1;
    }

    fn add_count(&mut self, key: &str, k: u64) {
        *self.counts.entry(key.to_string()).or_default() += k;
    }

    fn margin(&mut self, key: &str, v: i64) {
        let e = self.margins.entry(key.to_string()).or_insert(v);
        *e = (*e).min(v);
    }

    fn fail(&mut self, seed: u64, sample: usize, check: &str, detail: Value) {
        self.failures.push(Failure { seed, sample, check: check.to_string(), detail });
    }

    fn undetermined(&mut self, seed: u64, sample: usize, err: &CohomError) {
        self.undetermined = true;
        self.fail(seed, sample, "undetermined", json!({ "error": err.to_string() }));
    }

    fn merge(&mut self, other: Tally) {
        self.failures.extend(other.failures);
        for (k, v) in other.margins {
            self.margin(&k, v);
        }
        for (k, v) in other.counts {
            self.add_count(&k, v);
        }
        self.undetermined |= other.undetermined;
    }

    /// Checks `val >= bound`; an undecidable bound is counted, not asserted.
    #[allow(clippy::too_many_arguments)]
    fn at_least(&mut self, key: &str, val: ValExt, bound: u64, seed: u64, sample: usize, detail: impl FnOnce() -> Value) {
        match val.at_least(bound) {
            Ok(true) => {
                self.count(&format!("{key}.checked"));
                self.margin(key, val.lower_bound() as i64 - bound as i64);
            }
            Ok(false) => {
                self.count(&format!("{key}.checked"));
                self.margin(key, val.lower_bound() as i64 - bound as i64);
                let mut d = detail();
                d["value"] = json!(val.to_string());
                d["bound"] = json!(bound);
                self.fail(seed, sample, key, d);
            }
            Err(_) => self.count(&format!("{key}.refused")),
        }
    }
}

fn elem_json(t: &Tower, a: &OElem) -> Value {
    let z = t.zpn();
    json!(a.coeffs().iter().map(|&c| z.signed(c).to_string()).collect::<Vec<_>>())
}

fn vec_json(t: &Tower, v: &WittVec<OElem>) -> Value {
    json!(v.components().iter().map(|a| elem_json(t, a)).collect::<Vec<_>>())
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs samples `0..count` in parallel and merges their tallies in order.
fn par_samples<F>(count: usize, seed: u64, stream: &str, f: F) -> Tally
where
    F: Fn(usize, u64) -> Tally + Sync,
{
    let parts: Vec<Tally> = (0..count)
        .into_par_iter()
        .map(|i| f(i, sample_seed(seed, stream, i as u64)))
        .collect();
    let mut total = Tally::default();
    for t in parts {
        total.merge(t);
    }
    total
}

struct Run<'a> {
    tower: &'a Tower,
    params: &'a VerifyParams,
    lemma: LemmaId,
    n: Option<usize>,
    m: Option<u32>,
    tally: Tally,
    observations: BTreeMap<String, Value>,
    sign_convention: Option<String>,
    notes: Vec<String>,
}

impl Run<'_> {
    fn finish(mut self) -> VerificationReport {
        self.tally.failures.sort_by_key(|f| (f.seed, f.sample));
        let status = if self.tally.failures.is_empty() {
            Status::Pass
        } else if self.tally.undetermined && self.tally.failures.iter().all(|f| f.check == "undetermined") {
            Status::Undetermined
        } else {
            Status::Fail
        };
        let t = self.tower;
        VerificationReport {
            lemma: self.lemma.name().to_string(),
            tower_hash: t.hash().to_string(),
            params: ReportParams {
                n: self.n,
                m: self.m,
                samples: self.params.samples,
                seed: self.params.seed,
                precision: t.precision(),
            },
            status,
            failures: self.tally.failures,
            margins: self.tally.margins,
            counts: self.tally.counts,
            observations: self.observations,
            sign_convention: self.sign_convention,
            precision: PrecisionMeta {
                precision: t.precision(),
                delta: t.delta(),
                val_cap: t.val_cap(),
                val_cap_k: t.val_cap_k(),
            },
            notes: self.notes,
            runtime_ms: None,
        }
    }
}

/// Runs one verifier on one tower.
pub fn run_lemma(tower: &Tower, lemma: LemmaId, params: &VerifyParams) -> VerificationReport {
    let n = params.n.or_else(|| lemma.default_len(tower.p()));
    let mut run = Run {
        tower,
        params,
        lemma,
        n,
        m: None,
        tally: Tally::default(),
        observations: BTreeMap::new(),
        sign_convention: None,
        notes: Vec::new(),
    };
    let outcome = match lemma {
        LemmaId::Vktr => verify_vktr(&mut run),
        LemmaId::Vksub => verify_vksub(&mut run),
        LemmaId::LemmaC => verify_lemma_c(&mut run),
        LemmaId::Invariant => verify_invariant(&mut run),
        LemmaId::Steps => verify_steps(&mut run),
        LemmaId::Main => verify_main(&mut run),
        LemmaId::FixedPoints => verify_fixed_points(&mut run),
    };
    if let Err(e) = outcome {
        run.tally.undetermined(params.seed, 0, &e);
    }
    run.finish()
}

/// `pi_L^k u` with `u` a random unit.
fn element_of_valuation(t: &Tower, k: u64, rng: &mut ChaCha8Rng) -> OElem {
    let u = t.random_top_unit(rng);
    t.mul(&t.pi_l_pow(k), &u)
}

fn verify_vktr(run: &mut Run) -> Result<(), CohomError> {
    let t = run.tower;
    let p = t.p();
    let s = t.s();
    // keep the bound ceil((k + s(p-1))/p) strictly below the v_K cap
    let kmax = (t.val_cap() - 1).min(p * (t.val_cap_k() - 1) - s * (p - 1));
    let tally = par_samples(run.params.samples, run.params.seed, "vktr", |i, seed| {
        use rand::Rng;
        let mut tally = Tally::default();
        let mut rng = rng_for(seed);
        let k = rng.gen_range(0..=kmax);
        let a = element_of_valuation(t, k, &mut rng);
        if t.valuation(&a) != ValExt::Finite(k) {
            tally.fail(seed, i, "construction", json!({ "a": elem_json(t, &a), "k": k }));
            return tally;
        }
        let bound = (k + s * (p - 1)).div_ceil(p);
        match t.trace(&a) {
            Ok(tr) => {
                let v = t.valuation(&tr);
                if v.finite() == Some(bound) {
                    tally.count("vktr.tight");
                }
                tally.at_least("vktr", v, bound, seed, i, || json!({ "a": elem_json(t, &a), "v_L(a)": k }));
            }
            Err(e) => tally.fail(seed, i, "trace", json!({ "error": e.to_string() })),
        }
        tally
    });
    run.tally.merge(tally);
    run.notes.push("v_K(tr a) >= ceil((v_L(a) + s(p-1))/p) for a = pi_L^k u, u a random unit".into());
    Ok(())
}

fn verify_vksub(run: &mut Run) -> Result<(), CohomError> {
    let t = run.tower;
    let p = t.p();
    let e_k = t.e_k() as u64;
    // equality is decidable while e_K + v_L(a) < e_K N
    let kmax = t.val_cap_k() - e_k;
    let tally = par_samples(run.params.samples, run.params.seed, "vksub", |i, seed| {
        use rand::Rng;
        let mut tally = Tally::default();
        let mut rng = rng_for(seed);
        let k = rng.gen_range(0..kmax);
        let a = element_of_valuation(t, k, &mut rng);
        let res = (|| -> Result<ValExt, LfError> {
            let tr_ap = t.trace(&TopRing(t).pow(&a, p))?;
            let tr_a = t.trace(&a)?;
            let diff = t.sub(&tr_ap, &crate::localfield::BaseRing(t).pow(&tr_a, p));
            Ok(t.valuation(&diff))
        })();
        match res {
            Ok(v) => {
                tally.count("vksub.checked");
                let want = e_k + k;
                if v != ValExt::Finite(want) {
                    tally.fail(seed, i, "vksub", json!({
                        "a": elem_json(t, &a), "v_L(a)": k, "value": v.to_string(), "expected": want
                    }));
                } else {
                    tally.margin("vksub", 0);
                }
            }
            Err(e) => tally.fail(seed, i, "trace", json!({ "error": e.to_string() })),
        }
        tally
    });
    run.tally.merge(tally);
    run.notes.push("exact equality v_K(tr(a^p) - tr(a)^p) = e_K + v_L(a), asserted when e_K + v_L(a) < e_K N".into());
    Ok(())
}

fn draw(t: &Tower, ctx: &WittCtx, seed: u64, coboundary: bool) -> Result<KernelSample, CohomError> {
    let mut rng = rng_for(seed);
    if coboundary {
        sample_coboundary(t, ctx, &mut rng, seed)
    } else {
        sample_trace_zero(t, ctx, &mut rng, seed)
    }
}

fn witt_len(run: &Run, max: usize) -> Result<usize, CohomError> {
    let n = run.n.ok_or(CohomError::Witt(crate::wittcore::WittError::OutOfRange { p: run.tower.p(), n: 0 }))?;
    if n < 1 || n > max {
        return Err(CohomError::Witt(crate::wittcore::WittError::OutOfRange { p: run.tower.p(), n }));
    }
    Ok(n)
}

fn eval_h(t: &Tower, h: &crate::exactpoly::MPoly, family: &[OElem]) -> OElem {
    let ring = TopRing(t);
    let mut cache = PowerCache::new(&ring, family);
    cache.eval(h).expect("h is supported below its component")
}

fn verify_lemma_c(run: &mut Run) -> Result<(), CohomError> {
    let t = run.tower;
    let p = t.p();
    let n = witt_len(run, pfold_max_len(p))?;
    let ctx = WittCtx::new(p, n)?;
    let dec = pfold_decomposition(p, n)?;
    let c = constant_c(p);
    let c = i64::try_from(&c).expect("small constant");
    let pc = c * p as i64;
    let tally = par_samples(run.params.samples, run.params.seed, "lemma-c", |i, seed| {
        let mut tally = Tally::default();
        let k = match draw(t, &ctx, seed, false) {
            Ok(k) => k,
            Err(e) => {
                tally.undetermined(seed, i, &e);
                return tally;
            }
        };
        let x = k.vec.components();
        let family = conjugate_family(t, x);
        for ell in 2..=n {
            let res = (|| -> Result<(bool, bool, bool), LfError> {
                let lhs = t.scale_int(&t.trace(&x[ell - 1])?, -(p as i64));
                let prev = &x[ell - 2];
                let tr_prev = t.trace(prev)?;
                let first = t.sub(&t.trace(&TopRing(t).pow(prev, p))?, &crate::localfield::BaseRing(t).pow(&tr_prev, p));
                let tp = crate::localfield::BaseRing(t).pow(&tr_prev, p);
                let middle = t.scale_int(&tp, pc);
                let hv = t.scale_int(&eval_h(t, dec.h(ell), &family), p as i64);
                let minus = t.add(&t.sub(&first, &middle), &hv);
                let plus = t.add(&t.add(&first, &middle), &hv);
                let lhs = t.embed(&lhs);
                Ok((lhs == t.embed(&minus), lhs == t.embed(&plus), !middle.is_zero()))
            })();
            match res {
                Ok((m, pl, dist)) => {
                    tally.count("checks");
                    if m {
                        tally.count("minus_exact");
                    }
                    if pl {
                        tally.count("plus_exact");
                    }
                    if dist {
                        tally.count("distinguishing");
                    }
                    if !m && !pl {
                        tally.fail(seed, i, "identity", json!({ "ell": ell, "x": vec_json(t, &k.vec) }));
                    }
                }
                Err(e) => tally.fail(seed, i, "trace", json!({ "ell": ell, "error": e.to_string() })),
            }
        }
        tally
    });
    let checks = tally.counts.get("checks").copied().unwrap_or(0);
    let minus = tally.counts.get("minus_exact").copied().unwrap_or(0);
    let plus = tally.counts.get("plus_exact").copied().unwrap_or(0);
    let dist = tally.counts.get("distinguishing").copied().unwrap_or(0);
    run.tally.merge(tally);
    run.notes.push(format!(
        "identity checked multiplied through by p, with C = {c} and h from the degree-audited decomposition ({})",
        dec.convention().name()
    ));
    if checks > 0 && minus == checks {
        run.sign_convention = Some("minus".into());
        if plus == checks {
            run.notes.push(format!(
                "the C-term vanished on all {checks} checks ({dist} distinguishing), so the sign is immaterial here; recorded convention: minus"
            ));
        }
    } else if checks > 0 && plus == checks {
        run.sign_convention = Some("plus".into());
    } else if checks > 0 {
        run.tally.fail(run.params.seed, 0, "sign_convention", json!({
            "checks": checks, "minus_exact": minus, "plus_exact": plus
        }));
    }
    Ok(())
}

fn verify_invariant(run: &mut Run) -> Result<(), CohomError> {
    let t = run.tower;
    let p = t.p();
    let n = witt_len(run, pfold_max_len(p))?;
    let ctx = WittCtx::new(p, n)?;
    let dec = pfold_decomposition(p, n)?;
    let tally = par_samples(run.params.samples, run.params.seed, "invariant", |i, seed| {
        let mut tally = Tally::default();
        let k = match draw(t, &ctx, seed, false) {
            Ok(k) => k,
            Err(e) => {
                tally.undetermined(seed, i, &e);
                return tally;
            }
        };
        let x = k.vec.components();
        let family = conjugate_family(t, x);
        for ell in 2..=n {
            let hv = eval_h(t, dec.h(ell), &family);
            let detail = || json!({ "ell": ell, "x": vec_json(t, &k.vec), "h": elem_json(t, &hv) });
            tally.count("galois_fixed.checked");
            if t.galois(&hv) != hv {
                tally.fail(seed, i, "galois_fixed", detail());
            }
            let Some(hb) = t.base_part(&hv) else {
                tally.fail(seed, i, "in_base", detail());
                continue;
            };
            if ell == 2 {
                tally.count("h0_zero.checked");
                if !hb.is_zero() {
                    tally.fail(seed, i, "h0_zero", detail());
                }
                continue;
            }
            let m = x[..ell - 2].iter().map(|a| t.valuation(a)).filter_map(ValExt::finite).min();
            match m {
                Some(m) => {
                    let key = format!("valuation.ell{ell}");
                    tally.at_least(&key, t.valuation(&hb), p * m, seed, i, detail);
                }
                None => tally.count("valuation.refused"),
            }
        }
        tally
    });
    run.tally.merge(tally);
    run.notes.push("asserted v_K(h) >= p * min v_L(x_i) over i <= ell - 2 (each monomial of h has degree >= p^2)".into());
    Ok(())
}

fn verify_steps(run: &mut Run) -> Result<(), CohomError> {
    let t = run.tower;
    let p = t.p();
    let s = t.s();
    let n = witt_len(run, binary_max_len(p))?;
    let step1 = step_bound(s, p, 1);
    for len in 2..=n {
        let ctx = WittCtx::new(p, len)?;
        let stream = format!("steps.n{len}");
        let tally = par_samples(run.params.samples, run.params.seed, &stream, |i, seed| {
            let mut tally = Tally::default();
            for cob in [false, true] {
                let k = match draw(t, &ctx, seed ^ cob as u64, cob) {
                    Ok(k) => k,
                    Err(e) => {
                        tally.undetermined(seed, i, &e);
                        continue;
                    }
                };
                let tag = if cob { "coboundary" } else { "sampler" };
                tally.count(&format!("samples.{tag}"));
                let x = k.vec.components();
                let detail = || json!({ "n": len, "provenance": tag, "x": vec_json(t, &k.vec) });
                for ell in 1..len {
                    tally.at_least(&format!("n{len}.step1"), t.valuation(&x[ell - 1]), step1, seed, i, detail);
                }
                for idx in 1..len {
                    let b = step_bound(s, p, (len - idx) as u32);
                    tally.at_least(&format!("n{len}.step2.x{idx}"), t.valuation(&x[idx - 1]), b, seed, i, detail);
                }
            }
            tally
        });
        run.tally.merge(tally);
    }
    run.notes.push(format!(
        "ceiling bounds with s = {s}: step 1 bound {step1}; step 2 bound on x_(n-i) is ceil(s(p-1)/p * sum_(k<i) p^-k)"
    ));
    Ok(())
}

fn verify_main(run: &mut Run) -> Result<(), CohomError> {
    let t = run.tower;
    let p = t.p();
    let s = t.s();
    let m = compute_m(s, p);
    run.m = Some(m);
    run.n = Some(m as usize);
    if m as usize > binary_max_len(p) {
        return Err(CohomError::Witt(crate::wittcore::WittError::OutOfRange { p, n: m as usize }));
    }
    let ctx = WittCtx::new(p, m as usize)?;
    let tally = par_samples(run.params.samples, run.params.seed, "main", |i, seed| {
        let mut tally = Tally::default();
        let k = match draw(t, &ctx, seed, false) {
            Ok(k) => k,
            Err(e) => {
                tally.undetermined(seed, i, &e);
                return tally;
            }
        };
        let x1 = k.vec.get(1);
        let detail = || json!({ "x": vec_json(t, &k.vec) });
        tally.at_least("vL_x1_minus_s", t.valuation(x1), s, seed, i, detail);
        match level1_class_trivial(t, x1) {
            Ok(Level1Class::Trivial { .. }) => tally.count("level1_trivial"),
            Ok(Level1Class::Nontrivial { depth }) => {
                let mut d = detail();
                d["depth"] = json!(depth);
                tally.fail(seed, i, "level1_trivial", d);
            }
            Err(e) => tally.fail(seed, i, "level1_trivial", json!({ "error": e.to_string() })),
        }
        tally
    });
    run.tally.merge(tally);

    // contrast: nonzero classes at level one sit at v_L <= s - 1
    let h1 = h1_order_level1(t)?;
    run.observations.insert("h1_order_level1".into(), json!(h1.order));
    if h1.order_u128() > 1 {
        let kernel = t.solve_trace_eq(&t.base_zero())?;
        let mut cands: Vec<OElem> = kernel.free_kernel.clone();
        let mut rng = rng_for(sample_seed(run.params.seed, "contrast", 0));
        for _ in 0..64 {
            use rand::Rng;
            let mut acc = t.top_zero();
            for b in &kernel.free_kernel {
                acc = t.add(&acc, &t.scale_int(b, rng.gen_range(0..t.zpn().modulus()) as i64));
            }
            cands.push(acc);
        }
        let mut found = 0u64;
        let mut min_v: Option<u64> = None;
        for (j, c) in cands.iter().enumerate() {
            match level1_class_trivial(t, c)? {
                Level1Class::Nontrivial { .. } => {
                    found += 1;
                    let v = t.valuation(c);
                    min_v = min_v.min(v.finite()).or(v.finite());
                    match v.finite() {
                        Some(v) if v < s => run.tally.margin("contrast_s_minus_1_minus_vL", (s - 1) as i64 - v as i64),
                        _ => run.tally.fail(run.params.seed, j, "contrast", json!({
                            "x1": elem_json(t, c), "value": v.to_string(), "bound": s - 1
                        })),
                    }
                }
                Level1Class::Trivial { .. } => {}
            }
        }
        run.tally.add_count("contrast.nontrivial_found", found);
        run.tally.add_count("contrast.candidates", cands.len() as u64);
        if found == 0 {
            run.tally.fail(run.params.seed, 0, "contrast", json!({ "reason": "no nontrivial level-1 class found" }));
        }
    }

    // observation only: how small v_L(x_1) gets one length below M
    if m >= 2 {
        let shorter = WittCtx::new(p, m as usize - 1)?;
        let obs = run.params.samples.min(100);
        let mut min_v: Option<u64> = None;
        for i in 0..obs {
            let seed = sample_seed(run.params.seed, "main.shorter", i as u64);
            if let Ok(k) = draw(t, &shorter, seed, false) {
                if let Some(v) = t.valuation(k.vec.get(1)).finite() {
                    min_v = Some(min_v.map_or(v, |w| w.min(v)));
                }
            }
        }
        run.observations.insert(
            "min_vL_x1_at_length_M_minus_1".into(),
            json!({ "length": m - 1, "samples": obs, "min": min_v }),
        );
    }
    run.notes.push(format!("M = {m} from s = {s}; asserted v_L(x_1) >= s and level-1 triviality at length M"));
    run.notes.push("level-one statements read x_1 as the first component of a length-1 Witt vector".into());
    Ok(())
}

fn verify_fixed_points(run: &mut Run) -> Result<(), CohomError> {
    let t = run.tower;
    let p = t.p();
    let n = witt_len(run, binary_max_len(p))?;
    let fixed = t.solve_sigma_minus_one(&t.top_zero())?;
    let fixed_basis: Vec<OElem> = fixed.free_kernel.iter().chain(&fixed.precision_kernel).cloned().collect();
    let digits = t.precision().saturating_sub(t.sigma_minus_one_smith().delta());
    let tally = par_samples(run.params.samples, run.params.seed, "fixed-points", |i, seed| {
        use rand::Rng;
        let mut tally = Tally::default();
        let mut rng = rng_for(seed);
        // (a) vectors over O_K are fixed
        let base_vec = WittVec::new((0..n).map(|_| t.embed(&t.random_base(&mut rng))).collect::<Vec<_>>());
        tally.count("base_vectors_fixed.checked");
        if base_vec.map(|a| t.galois(a)) != base_vec {
            tally.fail(seed, i, "base_vectors_fixed", json!({ "x": vec_json(t, &base_vec) }));
        }
        // (b) fixed vectors have their components in O_K
        let comps: Vec<OElem> = (0..n)
            .map(|_| {
                fixed_basis.iter().fold(t.top_zero(), |acc, b| {
                    t.add(&acc, &t.scale_int(b, rng.gen_range(0..t.zpn().modulus()) as i64))
                })
            })
            .collect();
        let fixed_vec = WittVec::new(comps);
        if fixed_vec.map(|a| t.galois(a)) != fixed_vec {
            tally.fail(seed, i, "kernel_is_fixed", json!({ "x": vec_json(t, &fixed_vec) }));
        }
        for a in fixed_vec.components() {
            tally.count("fixed_in_base.checked");
            if !t.in_base_mod(a, digits) {
                tally.fail(seed, i, "fixed_in_base", json!({ "a": elem_json(t, a), "digits": digits }));
            } else if t.base_part(a).is_none() {
                tally.count("fixed_in_base.precision_artifacts");
            }
        }
        // (c) truncation W_n(O_K) -> W_(n-1)(O_K) has the preimage (x, 0)
        if n >= 2 {
            let short: Vec<OElem> = (0..n - 1).map(|_| t.embed(&t.random_base(&mut rng))).collect();
            let mut long = short.clone();
            long.push(t.top_zero());
            let long = WittVec::new(long);
            tally.count("truncation_preimage.checked");
            let ctx_ok = long.components()[..n - 1] == short[..]
                && long.map(|a| t.galois(a)) == long
                && long.components().iter().all(|a| t.base_part(a).is_some());
            if !ctx_ok {
                tally.fail(seed, i, "truncation_preimage", json!({ "x": vec_json(t, &long) }));
            }
        }
        tally
    });
    run.tally.merge(tally);
    let pi = t.pi_l();
    run.tally.count("non_base_not_fixed.checked");
    if t.galois(&pi) == pi {
        run.tally.fail(run.params.seed, 0, "non_base_not_fixed", json!({ "a": elem_json(t, &pi) }));
    }
    let i_like = t.sub(&pi, &t.top_one());
    let probe = WittVec::new(std::iter::once(i_like.clone()).chain((1..n).map(|_| t.top_zero())).collect::<Vec<_>>());
    run.tally.count("non_base_not_fixed.checked");
    if probe.map(|a| t.galois(a)) == probe {
        run.tally.fail(run.params.seed, 0, "non_base_not_fixed", json!({ "x": vec_json(t, &probe) }));
    }
    run.notes.push(format!(
        "fixed means sigma(a) = a modulo p^N; membership in O_K is checked modulo p^{digits} (N minus the sigma - 1 pivot loss)"
    ));
    Ok(())
}
