//! `kleinfour` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
//! errors (including requests beyond the evaluation budget).

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use report::{emit, CliError};

#[derive(Parser, Debug)]
#[command(name = "kleinfour", version, about = "Four-dimensional division algebras with a Klein-four automorphism subgroup")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format. `csv` is available for tabular results, `dot` for orbits.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the exhaustive scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Cap on evaluated points for every exhaustive scan.
    #[arg(long, env = "KLEINFOUR_BUDGET", global = true)]
    budget: Option<u128>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Dot,
}

/// Base field `F_q` and extension parameter.
#[derive(Args, Debug, Clone, Serialize)]
pub struct FieldArgs {
    /// Field order, an odd prime power.
    #[arg(long, conflicts_with_all = ["p", "n"])]
    pub q: Option<u64>,
    /// Characteristic (with --n).
    #[arg(long, requires = "n")]
    pub p: Option<u64>,
    /// Extension degree over the prime field (with --p).
    #[arg(long, requires = "p")]
    pub n: Option<u32>,
    /// Non-square defining the quadratic extension (default: the smallest one).
    #[arg(long)]
    pub t: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TripleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    /// Triple `c1,c2,c3`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PairArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
    #[arg(long, allow_hyphen_values = true)]
    pub d: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OrbitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    /// Block index 0, 1, 2 or 3.
    #[arg(long, default_value_t = 1)]
    pub nu: u8,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Admissibility,
    Classification,
    Morphisms,
    Groupoid,
    Structure,
    Counting,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderedCommand {
    /// Symbolic classification over square-ordered fields.
    Summary,
    /// Set predicates, certificate and isotropy search for one rational triple.
    Check {
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        /// Extension parameter over Q.
        #[arg(long, default_value = "-1", allow_hyphen_values = true)]
        t: String,
        /// Search height for isotropy witnesses.
        #[arg(long, default_value_t = 20)]
        height: u32,
    },
    /// Predicate consistency on the grid c1 = 1/2 + k/8, c2, c3 in [-3, 3] step 1/4.
    Grid {
        #[arg(long, default_value_t = 20)]
        height: u32,
    },
    /// `l*(c, d)` over `Q(sqrt t)`.
    Iso {
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long, default_value = "-1", allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value_t = 20)]
        height: u32,
    },
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Transversal of isomorphism classes over F_q with cross-checks.
    Classify(FieldArgs),
    /// Decide admissibility of one triple by every available route.
    Admissible(TripleArgs),
    /// Decide isomorphism of two algebras.
    Iso(PairArgs),
    /// Automorphism group of one algebra.
    Aut(TripleArgs),
    /// Orbits of the action groupoid on one block.
    Orbits(OrbitArgs),
    /// Run an invariant battery at one field order.
    Verify(VerifyArgs),
    /// Square-ordered fields, with exact rational inputs.
    #[command(subcommand)]
    Ordered(OrderedCommand),
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| report::usage(e.to_string()))?;
    }
    let budget = match cli.budget {
        Some(b) => kleinfour::Budget::uniform(b),
        None => kleinfour::Budget::default(),
    };
    let ctx = commands::Ctx {
        budget,
        budget_flag: cli.budget,
    };
    let output = match &cli.command {
        Command::Classify(a) => commands::classify(&ctx, a)?,
        Command::Admissible(a) => commands::admissible(&ctx, a)?,
        Command::Iso(a) => commands::iso(&ctx, a)?,
        Command::Aut(a) => commands::aut(&ctx, a)?,
        Command::Orbits(a) => commands::orbits(&ctx, a)?,
        Command::Verify(a) => commands::verify(&ctx, a)?,
        Command::Ordered(a) => commands::ordered(&ctx, a)?,
    };
    let text = output.render(cli.format)?;
    emit(&text, cli.out.as_deref())?;
    Ok(output.envelope.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
