use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wittcoh::cohomlab::VerifyParams;
use wittcoh::localfield::PrecisionSpec;
use wittcoh_cli::{
    cmd_oracle, cmd_polys, cmd_suite, cmd_tower_info, cmd_verify, default_manifest, load_manifest, load_tower,
    parse_lemma, parse_precision, run_suite, CliError, Format, Outcome, EXIT_CONFIG,
};

#[derive(Parser)]
#[command(name = "wittcoh", version, about = "Witt vectors, p-adic towers and their Galois cohomology")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump ghost, addition, negation and p-fold polynomials as JSON.
    Polys {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a tower and print its invariants.
    TowerInfo {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long, value_parser = precision)]
        precision: Option<PrecisionSpec>,
        #[arg(long, default_value_t = 0)]
        root_choice: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one verifier on one tower.
    Verify {
        #[arg(long)]
        lemma: String,
        #[arg(long)]
        tower: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = precision)]
        precision: Option<PrecisionSpec>,
        #[arg(long, default_value_t = 0)]
        root_choice: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Record wall-clock time in the report (makes it non-reproducible).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every verifier over a manifest of towers.
    Suite {
        /// Manifest JSON; the standard four towers and all verifiers if absent.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = precision)]
        precision: Option<PrecisionSpec>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the solver against brute-force enumeration.
    Oracle {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long, value_parser = precision)]
        precision: Option<PrecisionSpec>,
        /// Digits of the enumerated quotient for a single extra run.
        #[arg(long, requires = "t")]
        k: Option<u32>,
        /// Extra digits used to compute the trace kernel.
        #[arg(long, requires = "k")]
        t: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn precision(s: &str) -> Result<PrecisionSpec, String> {
    parse_precision(s).map_err(|e| e.to_string())
}

fn run(cmd: Command) -> Result<(Outcome, Option<PathBuf>), CliError> {
    Ok(match cmd {
        Command::Polys { p, n, out } => (cmd_polys(p, n)?, out),
        Command::TowerInfo { tower, precision, root_choice, out } => {
            (cmd_tower_info(&load_tower(&tower, precision, root_choice)?), out)
        }
        Command::Verify { lemma, tower, n, samples, seed, precision, root_choice, format, timing, out } => {
            let lemma = parse_lemma(&lemma)?;
            let tower = load_tower(&tower, precision, root_choice)?;
            (cmd_verify(&tower, lemma, &VerifyParams { n, samples, seed }, format, timing), out)
        }
        Command::Suite { manifest, samples, seed, precision, format, timing, out } => {
            let (m, dir) = match manifest {
                Some(path) => load_manifest(&path)?,
                None => (default_manifest(), PathBuf::new()),
            };
            let report = run_suite(&m, &dir, samples, seed, precision, timing)?;
            (cmd_suite(&report, format), out)
        }
        Command::Oracle { tower, precision, k, t, out } => {
            (cmd_oracle(&load_tower(&tower, precision, 0)?, k, t)?, out)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((outcome, out)) => {
            let mut text = outcome.stdout;
            text.push('\n');
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(EXIT_CONFIG as u8);
                    }
                    print!("{}", outcome.summary);
                }
                None => {
                    let _ = std::io::stdout().write_all(text.as_bytes());
                    eprint!("{}", outcome.summary);
                }
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
