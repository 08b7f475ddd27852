//! `iwlab`: Fitting ideals, biduals, Kolyvagin operators, synthetic Euler
//! systems and Iwasawa ideal relations from the command line.
//!
//! Exit codes: 0 success, 1 a mathematical violation was found, 2 bad usage
//! or bad input (including malformed JSON and precision exhaustion).

mod commands;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "iwlab", version, about = "Exact experiments with Euler systems over Iwasawa algebras")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Working precision N (coefficients modulo π^N); defaults to the input's.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Worker threads for the self-test.
    #[arg(long, global = true, env = "IWLAB_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fitting ideal Fitt_i of a presented module.
    Fitt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        i: usize,
    },
    /// Howell normal form of a matrix over R[G], flattened to Z/p^M.
    Howell {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// The bidual ∩^i M; with --precision ν also its reduction modulo p^ν.
    Bidual {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        i: usize,
    },
    /// Kolyvagin operator D_n, and s_n applied to an element if one is given.
    Kolyvagin {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Synthetic Euler systems.
    #[command(subcommand)]
    Euler(EulerCommand),
    /// Ideals of Z_p[[T]] and Z_p[[S,T]].
    #[command(subcommand)]
    Ideal(IdealCommand),
    /// Run the lemma suites.
    Selftest {
        /// Only these suites (name or anchor); repeatable.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum EulerCommand {
    /// Generate a universal instance on a random admissible tower.
    Gen {
        #[arg(long, default_value_t = 3)]
        p: u64,
        /// Orders of the Δ factors (prime to p).
        #[arg(long, value_delimiter = ',')]
        delta: Vec<u64>,
        /// Orders of the Γ factors.
        #[arg(long, value_delimiter = ',', default_value = "3")]
        gamma: Vec<u64>,
        /// Orders of the groups H_ℓ, one per prime.
        #[arg(long, value_delimiter = ',', default_value = "3,3")]
        primes: Vec<u64>,
    },
    /// Check the Euler-system axioms; exit 1 on any violation.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Derivative class κ at a layer and modulus.
    Derive {
        #[arg(long = "in")]
        input: PathBuf,
        /// Layer as levels per Γ factor, e.g. 1,0; defaults to the top layer.
        #[arg(long, value_delimiter = ',')]
        layer: Option<Vec<u32>>,
        /// Prime labels of n, e.g. l1,l2.
        #[arg(long, value_delimiter = ',')]
        n: Vec<String>,
    },
    /// The ideals C_i for i = 0..=#primes (or only --i).
    Ideals {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        layer: Option<Vec<u32>>,
        #[arg(long)]
        i: Option<usize>,
    },
    /// Compatibility of C_i with evaluating one Γ factor at a unit; exit 1 on failure.
    Compat {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        factor: usize,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        unit: i64,
        #[arg(long, value_delimiter = ',')]
        layer: Option<Vec<u32>>,
        /// Largest i checked.
        #[arg(long, default_value_t = 2)]
        i: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum IdealCommand {
    /// Decide I ≺ J, J ≺ I and I ∼ J for {"left": .., "right": ..}.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Image of a two-variable ideal modulo (1+S)^a1 (1+T)^a2 - u.
    Specialize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        a1: i64,
        #[arg(long, allow_negative_numbers = true)]
        a2: i64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        unit: i64,
    },
    /// Search a specialization keeping both ideals of height at least two.
    Goodprime {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_abs: i64,
        #[arg(long, value_delimiter = ',', default_value = "1", allow_negative_numbers = true)]
        units: Vec<i64>,
    },
    /// Growth of C(n) against ord at a degree-one prime.
    Slope {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        i: usize,
        #[arg(long, default_value_t = 6)]
        n_max: u32,
    },
}

/// A finished command: the report, its text rendering, and whether it
/// exhibits a violation.
pub struct Outcome {
    pub json: serde_json::Value,
    pub text: String,
    pub violation: bool,
}

fn run(cli: Cli) -> Result<Outcome> {
    let g = &cli.global;
    match cli.command {
        Command::Fitt { input, i } => commands::fitt(g, &input, i),
        Command::Howell { input } => commands::howell(&input),
        Command::Bidual { input, i } => commands::bidual(g, &input, i),
        Command::Kolyvagin { input } => commands::kolyvagin(&input),
        Command::Euler(c) => commands::euler(g, c),
        Command::Ideal(c) => commands::ideal(c),
        Command::Selftest { suites } => commands::selftest(g, &suites),
    }
}

fn emit(global: &Global, outcome: &Outcome) -> Result<()> {
    let mut doc = match global.format {
        Format::Json => serde_json::to_string_pretty(&outcome.json)?,
        Format::Text => outcome.text.trim_end().to_string(),
    };
    doc.push('\n');
    match &global.out {
        Some(path) => fs::write(path, doc).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(doc.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let global = cli.global.clone();
    match run(cli).and_then(|o| emit(&global, &o).map(|_| o.violation)) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
