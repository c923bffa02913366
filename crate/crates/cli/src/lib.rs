//! Command implementations behind the `wittcoh` binary. Each command returns
//! its output text and an exit code so the same paths can be driven from
//! tests.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use wittcoh::cohomlab::{
    brute_h1_order, brute_h1_order_stable, check_linsolve_by_enumeration, h1_order_level1, run_lemma,
    LemmaId, Status, VerificationReport, VerifyParams,
};
use wittcoh::localfield::{BuildOptions, LfError, Mat, PrecisionSpec, Tower, TowerSpec};
use wittcoh::wittcore::{binary_max_len, WittDump, WittError};

/// Exit code for configuration and usage errors.
pub const EXIT_CONFIG: i32 = 64;

/// Longest Witt length any verifier plans for; fixes the automatic precision.
pub const PLANNED_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Field(#[from] LfError),
    #[error(transparent)]
    Cohom(#[from] wittcoh::cohomlab::CohomError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Witt(WittError::OutOfRange { .. }) => EXIT_CONFIG,
            CliError::Field(LfError::NotEisenstein { .. }) => EXIT_CONFIG,
            _ => 1,
        }
    }
}

/// Output of a command: text for stdout, an optional summary for stderr,
/// and the process exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub stdout: String,
    pub summary: String,
    pub exit: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn parse_precision(s: &str) -> Result<PrecisionSpec, CliError> {
    s.parse().map_err(|_| CliError::Config(format!("precision must be a positive integer or \"auto\", got {s:?}")))
}

pub fn parse_tower_spec(text: &str, origin: &str) -> Result<TowerSpec, CliError> {
    TowerSpec::from_json(text).map_err(|e| CliError::Config(format!("invalid tower file {origin}: {e}")))
}

/// Builds a tower, applying an optional precision override.
pub fn build_tower(spec: &TowerSpec, precision: Option<PrecisionSpec>, root_choice: usize) -> Result<Tower, CliError> {
    let mut spec = spec.clone();
    if let Some(p) = precision {
        spec.precision = p;
    }
    Ok(Tower::from_spec(&spec, PLANNED_LEN, BuildOptions { root_choice })?)
}

pub fn load_tower(path: &Path, precision: Option<PrecisionSpec>, root_choice: usize) -> Result<Tower, CliError> {
    let spec = parse_tower_spec(&read(path)?, &path.display().to_string())?;
    build_tower(&spec, precision, root_choice)
}

pub fn cmd_polys(p: u64, n: usize) -> Result<Outcome, CliError> {
    let max = binary_max_len(p);
    if max == 0 || n == 0 || n > max {
        return Err(CliError::Config(format!("polys: need 1 <= n <= {max} for p = {p}, got n = {n}")));
    }
    let dump = WittDump::generate(p, n)?;
    let mut summary = format!("p = {p}, n = {n}, content hash {}\n", dump.content_hash);
    match &dump.pfold {
        Some(pf) => {
            summary.push_str(&format!("p-fold convention: {}\n", pf.convention));
            for a in &dump.degree_audit {
                let h = a.h_min_degree.as_deref().unwrap_or("-");
                summary.push_str(&format!("  ell = {}: min deg f = {}, min deg h = {}\n", a.ell, a.f_min_degree, h));
            }
        }
        None => summary.push_str("p-fold decomposition not generated at this length\n"),
    }
    Ok(Outcome { stdout: dump.to_json_pretty(), summary, exit: 0 })
}

pub fn cmd_tower_info(tower: &Tower) -> Outcome {
    let mut info = tower.info();
    info["other_roots"] = json!(tower
        .other_roots()
        .iter()
        .map(|r| r.coeffs().iter().map(|&c| tower.zpn().signed(c).to_string()).collect::<Vec<_>>())
        .collect::<Vec<_>>());
    let summary = format!(
        "e_L = {}, s = {}, N = {}, delta = {}\n",
        tower.e_l(),
        tower.s(),
        tower.precision(),
        tower.delta()
    );
    Outcome { stdout: serde_json::to_string_pretty(&info).expect("json"), summary, exit: 0 }
}

pub fn parse_lemma(name: &str) -> Result<LemmaId, CliError> {
    LemmaId::parse(name).ok_or_else(|| {
        let ids: Vec<_> = LemmaId::ALL.iter().map(|l| l.name()).collect();
        CliError::Config(format!("unknown lemma id {name:?} (known: {})", ids.join(", ")))
    })
}

const CSV_HEADER: [&str; 10] =
    ["tower_hash", "lemma", "status", "failures", "worst_margin", "checked", "refused", "N", "samples", "seed"];

fn csv_row(r: &VerificationReport) -> Vec<String> {
    let sum = |suffix: &str| -> u64 { r.counts.iter().filter(|(k, _)| k.ends_with(suffix)).map(|(_, v)| v).sum() };
    vec![
        r.tower_hash.clone(),
        r.lemma.clone(),
        r.status.name().to_string(),
        r.failures.len().to_string(),
        r.worst_margin().map_or(String::new(), |m| m.to_string()),
        sum("checked").to_string(),
        sum("refused").to_string(),
        r.params.precision.to_string(),
        r.params.samples.to_string(),
        r.params.seed.to_string(),
    ]
}

fn csv_text(rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn run_verify(tower: &Tower, lemma: LemmaId, params: &VerifyParams, timing: bool) -> VerificationReport {
    let start = std::time::Instant::now();
    let mut report = run_lemma(tower, lemma, params);
    if timing {
        report.runtime_ms = Some(start.elapsed().as_millis() as u64);
    }
    report
}

pub fn cmd_verify(tower: &Tower, lemma: LemmaId, params: &VerifyParams, format: Format, timing: bool) -> Outcome {
    let report = run_verify(tower, lemma, params, timing);
    let stdout = match format {
        Format::Json => report.to_json_pretty(),
        Format::Csv => csv_text(&[csv_row(&report)]),
    };
    let m = report.params.m.map_or(String::new(), |m| format!(", M = {m}"));
    let summary = format!(
        "{} on {}: {} ({} failures{m})\n",
        report.lemma,
        &report.tower_hash[..12],
        report.status.name(),
        report.failures.len()
    );
    Outcome { stdout, summary, exit: report.status.exit_code() }
}

/// A tower entry in a manifest: a path (relative to the manifest) or an
/// inline description.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum TowerEntry {
    Path(String),
    Inline(TowerSpec),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Manifest {
    pub towers: Vec<TowerEntry>,
    pub lemmas: Vec<String>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

const DEFAULT_TOWERS: [(&str, &str); 4] = [
    ("q2i.json", include_str!("../../../towers/q2i.json")),
    ("q2sqrt2.json", include_str!("../../../towers/q2sqrt2.json")),
    ("q2sqrtm2.json", include_str!("../../../towers/q2sqrtm2.json")),
    ("q3cubic.json", include_str!("../../../towers/q3cubic.json")),
];

/// The standard test set crossed with every verifier.
pub fn default_manifest() -> Manifest {
    Manifest {
        towers: DEFAULT_TOWERS
            .iter()
            .map(|(_, text)| TowerEntry::Inline(TowerSpec::from_json(text).expect("shipped tower parses")))
            .collect(),
        lemmas: LemmaId::ALL.iter().map(|l| l.name().to_string()).collect(),
        samples: None,
        seed: None,
    }
}

pub fn load_manifest(path: &Path) -> Result<(Manifest, PathBuf), CliError> {
    let m: Manifest = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Config(format!("invalid manifest {}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((m, dir))
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteCell {
    pub tower: String,
    pub tower_hash: String,
    pub lemma: String,
    pub status: Status,
    pub worst_margin: Option<i64>,
    pub report: VerificationReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub samples: usize,
    pub seed: u64,
    pub status: Status,
    pub exit_code: i32,
    pub cells: Vec<SuiteCell>,
}

impl SuiteReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("json")
    }

    /// Lemma-by-tower table of status and worst margin.
    pub fn table(&self) -> String {
        let mut towers: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !towers.contains(&c.tower.as_str()) {
                towers.push(&c.tower);
            }
        }
        let mut lemmas: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !lemmas.contains(&c.lemma.as_str()) {
                lemmas.push(&c.lemma);
            }
        }
        let w = 20;
        let mut out = format!("{:<14}", "lemma");
        for t in &towers {
            out.push_str(&format!("{t:<w$}"));
        }
        out.push('\n');
        for l in &lemmas {
            out.push_str(&format!("{l:<14}"));
            for t in &towers {
                let cell = self.cells.iter().find(|c| c.lemma == *l && c.tower == *t);
                let text = cell.map_or("-".to_string(), |c| {
                    let m = c.worst_margin.map_or("n/a".to_string(), |m| m.to_string());
                    format!("{} ({m})", c.status.name())
                });
                out.push_str(&format!("{text:<w$}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs every (tower, lemma) cell of a manifest. Cells run concurrently;
/// the report lists them in manifest order.
pub fn run_suite(
    manifest: &Manifest,
    base_dir: &Path,
    samples: usize,
    seed: u64,
    precision: Option<PrecisionSpec>,
    timing: bool,
) -> Result<SuiteReport, CliError> {
    if manifest.towers.is_empty() || manifest.lemmas.is_empty() {
        return Err(CliError::Config("manifest needs at least one tower and one lemma".into()));
    }
    let lemmas = manifest.lemmas.iter().map(|l| parse_lemma(l)).collect::<Result<Vec<_>, _>>()?;
    let samples = manifest.samples.unwrap_or(samples);
    let seed = manifest.seed.unwrap_or(seed);
    let mut towers = Vec::new();
    for entry in &manifest.towers {
        let (label, spec) = match entry {
            TowerEntry::Path(p) => {
                let path = base_dir.join(p);
                let spec = parse_tower_spec(&read(&path)?, p)?;
                (spec.name.clone().unwrap_or_else(|| p.clone()), spec)
            }
            TowerEntry::Inline(spec) => (spec.name.clone().unwrap_or_else(|| "inline".into()), spec.clone()),
        };
        towers.push((label, build_tower(&spec, precision, 0)?));
    }
    let jobs: Vec<(usize, LemmaId)> =
        (0..towers.len()).flat_map(|t| lemmas.iter().map(move |&l| (t, l))).collect();
    let params = VerifyParams { n: None, samples, seed };
    let cells: Vec<SuiteCell> = jobs
        .par_iter()
        .map(|&(t, l)| {
            let (label, tower) = &towers[t];
            let report = run_verify(tower, l, &params, timing);
            SuiteCell {
                tower: label.clone(),
                tower_hash: report.tower_hash.clone(),
                lemma: l.name().to_string(),
                status: report.status,
                worst_margin: report.worst_margin(),
                report,
            }
        })
        .collect();
    let status = cells.iter().map(|c| c.status).max().unwrap_or(Status::Pass);
    let exit_code = cells.iter().map(|c| c.status.exit_code()).max().unwrap_or(0);
    Ok(SuiteReport { samples, seed, status, exit_code, cells })
}

pub fn cmd_suite(report: &SuiteReport, format: Format) -> Outcome {
    let stdout = match format {
        Format::Json => report.to_json_pretty(),
        Format::Csv => csv_text(&report.cells.iter().map(|c| csv_row(&c.report)).collect::<Vec<_>>()),
    };
    Outcome { stdout, summary: report.table(), exit: report.exit_code }
}

/// Brute-force cross-checks: H^1 order by enumeration against the solver,
/// and the solver against enumeration on the trace and sigma - 1 matrices.
pub fn cmd_oracle(tower: &Tower, k: Option<u32>, t: Option<u32>) -> Result<Outcome, CliError> {
    let p = tower.p();
    let mut out = json!({ "tower_hash": tower.hash() });
    if let (Some(k), Some(t)) = (k, t) {
        out["enumeration"] = json!({ "k": k, "t": t, "order": brute_h1_order(tower, k, t)?.to_string() });
    }
    let solver = h1_order_level1(tower)?;
    out["h1_order_level1"] = json!(solver.order);
    let stable = brute_h1_order_stable(tower);
    let mut exit = 0;
    match &stable {
        Ok(o) => {
            out["brute_h1"] = json!({
                "order": o.order.to_string(),
                "table": o.table.iter().map(|(k, t, o)| json!({ "k": k, "t": t, "order": o.to_string() })).collect::<Vec<_>>(),
            });
            if o.order.to_string() != solver.order {
                exit = 1;
            }
        }
        Err(e) => {
            out["brute_h1"] = json!({ "error": e.to_string() });
            exit = 2;
        }
    }
    let mut checks = Vec::new();
    for (name, m) in [("trace", tower.trace_matrix()), ("sigma_minus_one", tower.sigma_minus_one_matrix())] {
        for digits in [2u32, 3] {
            let reduced = reduce_entries(m, p, digits);
            match check_linsolve_by_enumeration(p, digits, &reduced) {
                Ok(c) => {
                    if !c.passed() {
                        exit = exit.max(1);
                    }
                    checks.push(json!({ "matrix": name, "digits": digits, "check": c, "passed": c.passed() }));
                }
                Err(e) => checks.push(json!({ "matrix": name, "digits": digits, "skipped": e.to_string() })),
            }
        }
    }
    out["linsolve"] = Value::Array(checks);
    let summary = format!(
        "solver H^1 order {}, enumeration {}\n",
        solver.order,
        stable.as_ref().map_or("n/a".to_string(), |o| o.order.to_string())
    );
    Ok(Outcome { stdout: serde_json::to_string_pretty(&out).expect("json"), summary, exit })
}

fn reduce_entries(m: &Mat, p: u64, digits: u32) -> Mat {
    let q = p.pow(digits);
    Mat::from_rows((0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j) % q).collect()).collect())
}
