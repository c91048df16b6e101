//! The `ontolab` command-line runner.
//!
//! Every command reads one problem document (or the bundled example for that
//! command), prints a JSON [`RunReport`] to standard output and optionally
//! writes a CSV table to `--out`. Exit status is 0 when every check in the
//! report passes, 1 when one fails and 2 for usage, parse and input errors.

mod commands;
mod doc;
mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};

pub use doc::{parse_problem, DocOptions, ModelSpec, NamedState, ProblemDocument};
pub use report::{fmt_f64, sha256_hex, Check, Csv, RunReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Bundled example documents, by file name.
pub const BUNDLED: [(&str, &str); 5] = [
    ("delta_d3.json", include_str!("../../data/delta_d3.json")),
    ("mub9_d3.json", include_str!("../../data/mub9_d3.json")),
    ("cabello18.json", include_str!("../../data/cabello18.json")),
    ("bell_states.json", include_str!("../../data/bell_states.json")),
    ("bohm_gaussian.json", include_str!("../../data/bohm_gaussian.json")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Parser)]
#[command(name = "ontolab", version, about = "Ontological models of finite-dimensional quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Compare a model's predictions with the Born rule on listed states and effects.
    VerifyModel(Args),
    /// Reconstruct per-point operators and check the support structure of a model.
    TheoremCheck(Args),
    /// Search for finite nonnegative models reproducing the Born table.
    Feasibility(Args),
    /// Count noncontextual 0/1 assignments on a ray set.
    KsSearch(Args),
    /// CHSH values, grid-search maxima and the closed-form maximum of two-qubit states.
    Chsh(Args),
    /// Discrete Wigner tables of states in odd prime dimension.
    Wigner(Args),
    /// Region probability for a sampled one-dimensional position density.
    Bohm(Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyModel(_) => "verify-model",
            Command::TheoremCheck(_) => "theorem-check",
            Command::Feasibility(_) => "feasibility",
            Command::KsSearch(_) => "ks-search",
            Command::Chsh(_) => "chsh",
            Command::Wigner(_) => "wigner",
            Command::Bohm(_) => "bohm",
        }
    }

    pub fn args(&self) -> &Args {
        match self {
            Command::VerifyModel(a)
            | Command::TheoremCheck(a)
            | Command::Feasibility(a)
            | Command::KsSearch(a)
            | Command::Chsh(a)
            | Command::Wigner(a)
            | Command::Bohm(a) => a,
        }
    }

    /// Bundled document used when no input path is given.
    pub fn default_document(&self) -> &'static str {
        match self {
            Command::VerifyModel(_) | Command::TheoremCheck(_) => "delta_d3.json",
            Command::Feasibility(_) | Command::Wigner(_) => "mub9_d3.json",
            Command::KsSearch(_) => "cabello18.json",
            Command::Chsh(_) => "bell_states.json",
            Command::Bohm(_) => "bohm_gaussian.json",
        }
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Args {
    /// Problem document (JSON); the bundled example for the command when omitted.
    pub input: Option<PathBuf>,
    /// Seed for all random choices [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance for the report checks [default depends on the command].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of ontic points K for `feasibility` [default: number of states].
    #[arg(long)]
    pub ontic_size: Option<usize>,
    /// Random restarts for `feasibility` [default: 20].
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Lattice size of the qubit hemisphere model, or grid size of the
    /// `(state, lambda)` model [default: 20000 and 1000].
    #[arg(long)]
    pub lattice: Option<usize>,
    /// Write the command's table as CSV to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Iteration cap per restart for `feasibility` [default: 200].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Grid steps per angle for `chsh` [default: 12].
    #[arg(long)]
    pub grid_steps: Option<usize>,
    /// Refinement rounds for `chsh` [default: 5].
    #[arg(long)]
    pub refine_iters: Option<usize>,
    /// `feasibility`: run every K from 1 to the number of states.
    #[arg(long)]
    pub sweep: bool,
    /// `verify-model`: write the model, tabulated on the listed states and
    /// effects, as a document to this path.
    #[arg(long)]
    pub export_model: Option<PathBuf>,
}

/// Everything a run produces; nothing is written until [`execute`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub csv: Option<Csv>,
    /// Document text for `--export-model`.
    pub export: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Runs a command on document text; `source` is echoed in the report.
pub fn run_text(command: &Command, source: &str, text: &str) -> Result<Outcome> {
    let doc = parse_problem(text)?;
    let mut outcome = commands::dispatch(command, &doc)?;
    outcome.report.input = source.to_string();
    outcome.report.input_digest = sha256_hex(text.as_bytes());
    Ok(outcome)
}

/// Loads the input named by the arguments (or the bundled default) and runs.
pub fn run(command: &Command) -> Result<Outcome> {
    let args = command.args();
    match &args.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            run_text(command, &path.display().to_string(), &text)
        }
        None => {
            let name = command.default_document();
            run_text(command, &format!("bundled:{name}"), bundled(name).expect("bundled document"))
        }
    }
}

/// Runs, writes the report and side files, and returns the exit code.
pub fn execute(cli: &Cli) -> i32 {
    let outcome = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let args = cli.command.args();
    if let (Some(path), Some(csv)) = (&args.out, &outcome.csv) {
        if let Err(e) = std::fs::write(path, csv.render()) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    if let (Some(path), Some(text)) = (&args.export_model, &outcome.export) {
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    print!("{}", outcome.report.to_json());
    outcome.exit_code()
}

fn require(cond: bool, message: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Document(message.into()))
    }
}
