//! `fatcheck`: command-line front end.
//!
//! Every command prints one JSON verdict on stdout,
//! `{"tool", "result": "yes"|"no"|"error", "reason", "payload"}`, and exits
//! with 0, 1 or 2 accordingly.  Human-readable notes go to stderr unless
//! `--quiet` is given.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "fatcheck", version, about = "Atomic System F: checking, inference, encodings, equivalence")]
struct Cli {
    /// Suppress diagnostics on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for directory inputs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide Γ ⊢ t : A.  A directory of `.lam` files is checked file by file;
    /// a sibling `NAME.type` overrides `--type` for `NAME.lam`.
    Check {
        #[arg(long)]
        ctx: Option<PathBuf>,
        #[arg(long)]
        term: PathBuf,
        #[arg(long = "type")]
        ty: Option<String>,
        #[arg(long)]
        node_limit: Option<u64>,
    },
    /// Decide whether t has some type under Γ.
    Infer {
        #[arg(long)]
        ctx: Option<PathBuf>,
        #[arg(long)]
        term: PathBuf,
    },
    /// β-normalize (and η-reduce with --eta).
    Normalize {
        #[arg(long)]
        term: PathBuf,
        #[arg(long)]
        eta: bool,
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Solve a Fat-unification problem given as JSON.
    Unify {
        problem: PathBuf,
        /// Treat residual `X = π^l(a)` equations as failures.
        #[arg(long)]
        no_pins: bool,
        #[arg(long)]
        node_limit: Option<u64>,
    },
    /// Print an encoding term or context.
    Encode {
        #[arg(long, value_enum)]
        op: EncodeOp,
        /// Result type C of a destructor context.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value = "A")]
        left: String,
        #[arg(long, default_value = "B")]
        right: String,
        /// Injection index.
        #[arg(long, default_value_t = 1)]
        index: u8,
        /// Also typecheck the output.
        #[arg(long)]
        check: bool,
    },
    /// Decide ≃Nat between two numerical functions.
    Eqnat {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        arity: usize,
    },
    /// Build the separating pair for a type, and a separating context from a
    /// witness.
    Separate {
        #[arg(long = "type")]
        ty: String,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        nat: bool,
    },
    /// Translate formulas into types.
    Translate {
        #[arg(long, value_enum)]
        mode: TranslateMode,
        #[arg(long)]
        formula: Option<String>,
        /// Assumptions for the dyadic mode (repeatable).
        #[arg(long)]
        assume: Vec<String>,
        /// A type to read back as a monadic formula.
        #[arg(long = "type")]
        ty: Option<String>,
    },
    /// Bounded inhabitation search.
    Search {
        #[arg(long = "type")]
        ty: String,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        ctx: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EncodeOp {
    IoPlus,
    IoTimes,
    Inj,
    Pair,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TranslateMode {
    Dyadic,
    Monadic,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let r = Report::error("Usage", serde_json::json!({"message": e.to_string()}));
            eprint!("{e}");
            return r.emit(true);
        }
    };
    let report = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build()
        .map(|pool| pool.install(|| commands::run(&cli.command)))
        .unwrap_or_else(|e| Report::error("ThreadPool", serde_json::json!({"message": e.to_string()})));
    report.emit(cli.quiet)
}
