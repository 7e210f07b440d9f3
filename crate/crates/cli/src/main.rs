//! `discsym`: discrete symmetries of differential equations from the
//! automorphisms of their Lie algebras.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use discsym_core::sampling::{DEFAULT_SAMPLES, DEFAULT_TOL};
use discsym_core::suite::Check;

use report::RunReport;

/// Environment variable holding the default sampling seed.
pub const SEED_ENV: &str = "DISCSYM_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "discsym",
    version,
    about = "Discrete symmetries from Lie algebra automorphisms"
)]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Add wall-clock duration to the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Automorphism constraints, their solution families and canonical forms.
    Auto(AutoArgs),
    /// Residual checks for discrete symmetries.
    Verify(VerifyArgs),
    /// Group closure and Cayley table fingerprint.
    Group(GroupArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["file", "catalog", "all"])))]
pub struct AutoArgs {
    /// Algebra file (JSON with `dim` and `brackets`).
    pub file: Option<PathBuf>,
    /// Bundled algebra by name.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Every bundled algebra.
    #[arg(long)]
    pub all: bool,
    /// Solve the constraints into parametric families.
    #[arg(long)]
    pub solve: bool,
    /// Reduce the families modulo inner automorphisms (implies --solve).
    #[arg(long)]
    pub canonicalize: bool,
    /// Reduction strategy: a bundled name or `greedy`.
    #[arg(long)]
    pub strategy: Option<String>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["catalog", "all", "equation"])))]
pub struct VerifyArgs {
    /// Catalog entry.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Every catalog entry.
    #[arg(long)]
    pub all: bool,
    /// Equation file, for checking user maps.
    #[arg(long, requires = "map")]
    pub equation: Option<PathBuf>,
    /// Algebra file for the user generators.
    #[arg(long, requires = "equation")]
    pub algebra: Option<PathBuf>,
    /// Characteristic function of a user generator (repeatable, in basis order).
    #[arg(long = "generator", requires = "algebra")]
    pub generators: Vec<String>,
    /// Map to check instead of the entry's own: `identity`, a map label of
    /// the entry, or a map file (repeatable).
    #[arg(long, conflicts_with = "all")]
    pub map: Vec<String>,
    #[arg(long, env = SEED_ENV, default_value_t = discsym_core::sampling::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Comma-separated checks.
    #[arg(long, value_delimiter = ',', default_values_t = Check::DEFAULT)]
    pub checks: Vec<Check>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["catalog", "all", "map"])))]
pub struct GroupArgs {
    /// Catalog entry.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Every catalog entry.
    #[arg(long)]
    pub all: bool,
    /// Generator map files.
    #[arg(long)]
    pub map: Vec<PathBuf>,
    /// Largest closure before the group is declared unbounded.
    #[arg(long, default_value_t = 64)]
    pub max_size: usize,
    /// Print the Cayley table.
    #[arg(long)]
    pub table: bool,
    #[arg(long, env = SEED_ENV, default_value_t = discsym_core::sampling::DEFAULT_SEED)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = RunReport::new(std::env::args().skip(1).collect());
    match &cli.command {
        Command::Auto(a) => commands::auto(a, &mut report),
        Command::Verify(v) => commands::verify(v, &mut report),
        Command::Group(g) => commands::group(g, &mut report),
    }
    report.finish();
    if cli.timing {
        report.duration_ms = Some(start.elapsed().as_millis() as u64);
    }
    let out = if cli.json {
        report.render_json()
    } else {
        report.render_text()
    };
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(out.as_bytes());
    ExitCode::from(report.exit_code)
}
