//! `charflow` — certification and integration runner for the polynomial
//! Hamiltonian systems attached to doubly-periodic character grids.
//!
//! Every subcommand reads one JSON configuration (see `config.rs`), prints a
//! JSON report embedding the resolved configuration and the library version,
//! and exits with: 0 when all checked identities hold, 1 when an identity
//! fails, 2 on a configuration error, 3 on a computation error, 4 when a
//! float path aborts near a singular locus (the last reached state is
//! reported).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{Ctx, Mode};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "charflow",
    version,
    about = "Certify and explore polynomial Hamiltonian systems built from character grids",
    after_help = "Exit codes: 0 all checks pass, 1 identity failure, 2 configuration error, \
                  3 computation error, 4 singular abort (last state reported)."
)]
struct Cli {
    /// JSON run configuration; built-in defaults are used when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for randomized checks; overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory receiving reports and data files (default: current directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Arithmetic mode: exact rational certification or float spot checks.
    #[arg(long, global = true, value_enum, default_value_t = CliMode::Exact)]
    mode: CliMode,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMode {
    Exact,
    Float,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full exact identity suite on one grid: bilinear and
    /// difference relations, auxiliary-function system, canonical equations,
    /// and the structure and deformation identities of the linear system.
    Certify,
    /// Integrate the Hamiltonian flows along a path of deformation values
    /// and report float diagnostics (trace comparison, endpoint error
    /// against the exact solution, two-route commutativity).
    Integrate,
    /// Check the defining relations of the symmetry group at random rational
    /// points, or transport the grid solution along a generator word and
    /// recertify it (with `--mode float`: check the symplectic property of
    /// the word at random float points).
    Symmetry,
    /// Report the structure of the linear system: residue matrices, local
    /// exponent table, spectral type, and accessory parameter count.
    Lax,
    /// Compare the one-deformation Hamiltonian with the reference
    /// sixth-Painleve form through the exact parameter dictionary.
    PviCompare,
    /// Compare the Hamiltonians with the reference multivariable form under
    /// the rational canonical change of variables.
    GarnierCompare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match RunConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("charflow: {e}");
            return ExitCode::from(2);
        }
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let (name, runner): (&'static str, fn(&Ctx) -> charflow::Result<i32>) = match cli.command {
        Command::Certify => ("certify", commands::cmd_certify),
        Command::Integrate => ("integrate", commands::cmd_integrate),
        Command::Symmetry => ("symmetry", commands::cmd_symmetry),
        Command::Lax => ("lax", commands::cmd_lax),
        Command::PviCompare => ("pvi-compare", commands::cmd_pvi_compare),
        Command::GarnierCompare => ("garnier-compare", commands::cmd_garnier_compare),
    };
    let ctx = Ctx {
        config,
        mode: match cli.mode {
            CliMode::Exact => Mode::Exact,
            CliMode::Float => Mode::Float,
        },
        seed,
        out_dir: commands::resolve_out(cli.out.as_deref()),
        command: name,
    };
    match runner(&ctx) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("charflow {name}: {e}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
