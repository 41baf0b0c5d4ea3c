//! `lorentz`: JSON in, JSON (or CSV) out.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lorentz_core::{Config, Error};
use serde_json::json;

#[derive(Parser)]
#[command(name = "lorentz", version, about = "Integral Lorentzian forms, their isometries and invariants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Elliptic / parabolic / hyperbolic type of an isometry.
    Classify(Common),
    /// Every integral isometry with entries bounded by `--bound`.
    Search(Common),
    /// Invariant forms of a set of matrices, or an averaged form from `q0`.
    InvariantForm(Common),
    /// Rational flag and normal-form parameter (parabolic) or eigendata (hyperbolic).
    Flag(Common),
    /// Approximately stable hyperplane and its lightlike line.
    Stable(Common),
    /// Spectral tags of a polynomial, or of every hyperbolic element found by a search.
    SalemScan(Common),
    /// Exact orbit of a torus point, as CSV.
    Orbit(Common),
    /// Open cone test for a Lie algebra presentation.
    Cone(Common),
    /// Amalgamated metric of a point frame.
    Amalgam(Common),
}

#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// Input file, or an inline JSON document; standard input when omitted.
    #[arg(long)]
    pub input: Option<String>,
    /// Output file, written atomically; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON configuration overriding tolerances and budgets.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Entry bound `M` for searches.
    #[arg(long)]
    pub bound: Option<u32>,
    /// Modulus for the congruence-kernel test.
    #[arg(long)]
    pub modulus: Option<i64>,
    /// Number of orbit steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Where `orbit` writes its statistics JSON.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

/// A failure with its exit code: 1 for domain errors, 2 for malformed input.
#[derive(Debug)]
pub struct Failure {
    pub tag: String,
    pub message: String,
    pub code: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            tag: e.tag().to_string(),
            message: e.to_string(),
            code: if e.is_input_error() { 2 } else { 1 },
        }
    }
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            tag: "Parse".into(),
            message: message.into(),
            code: 2,
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, Failure> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::input(format!("config: {e}")))
        }
    }
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => output::write_atomic(p, text).map_err(|e| Failure {
            tag: "Io".into(),
            message: format!("{}: {e}", p.display()),
            code: 1,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, commands::Runner) = match &cli.command {
        Command::Classify(c) => (c, commands::classify),
        Command::Search(c) => (c, commands::search),
        Command::InvariantForm(c) => (c, commands::invariant_form),
        Command::Flag(c) => (c, commands::flag),
        Command::Stable(c) => (c, commands::stable),
        Command::SalemScan(c) => (c, commands::salem_scan),
        Command::Orbit(c) => (c, commands::orbit),
        Command::Cone(c) => (c, commands::cone),
        Command::Amalgam(c) => (c, commands::amalgam),
    };
    let result = load_config(&common.config)
        .and_then(|config| {
            let input = commands::read_input(&common.input)?;
            run(common, &config, input)
        })
        .and_then(|out| emit(&common.output, &out));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let doc = output::render(&json!({"error": f.tag, "message": f.message}));
            // Fall back to standard output if the output file itself is the problem.
            if emit(&common.output, &doc).is_err() {
                print!("{doc}");
            }
            ExitCode::from(f.code)
        }
    }
}
