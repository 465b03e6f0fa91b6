mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Usage;
use crate::config::RunConfig;

/// Find coordinated reviewer groups: (k,d) reviewer similarity graphs,
/// maximal cliques and θ-dense pseudo-cliques.
///
/// Paths given as `-` mean stdin or stdout. Every option can also be set in
/// the TOML file passed with --config; flags win over the file.
#[derive(Debug, Parser)]
#[command(name = "cliquescout", version, max_term_width = 100)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores; 1 runs sequentially).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read newline-delimited JSON reviews (and optional users) into a store file.
    Ingest(IngestArgs),
    /// Build one (k,d) graph and write it as an edge list or DOT.
    Build(BuildArgs),
    /// List maximal cliques of a graph.
    Cliques(CliqueArgs),
    /// List pseudo-cliques (edge density at least θ) of a graph.
    Quasicliques(QuasiArgs),
    /// Count maximal groups per size over a (k,d) grid.
    Table(TableArgs),
    /// List groups with per-pair venue and date evidence as JSON lines.
    Flag(FlagArgs),
    /// Join flagged groups with a user label file.
    Annotate(AnnotateArgs),
    /// Export the union of flagged groups as a weighted graph.
    Export(ExportArgs),
    /// Generate a synthetic dataset with planted groups.
    Synth(SynthArgs),
    /// Run the oracle differential suite, or re-check group listings.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Review file (`-` for stdin).
    #[arg(long, value_name = "FILE")]
    pub reviews: Option<PathBuf>,
    /// User file with friend lists.
    #[arg(long, value_name = "FILE")]
    pub users: Option<PathBuf>,
    /// Store file to write (`-` for stdout).
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Fraction of lines that may be skipped as malformed [default: 0.001].
    #[arg(long, value_name = "F")]
    pub max_skip_fraction: Option<f64>,
    /// Fail on the first malformed line.
    #[arg(long, conflicts_with = "max_skip_fraction")]
    pub strict: bool,
    /// Accept `YYYY-MM-DD hh:mm:ss` dates, dropping the time of day.
    #[arg(long)]
    pub allow_datetime: bool,
    /// Write ingest statistics as JSON.
    #[arg(long, value_name = "FILE")]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StoreParams {
    /// Store file written by `ingest` (`-` for stdin).
    #[arg(long, value_name = "FILE")]
    pub store: Option<PathBuf>,
    /// Minimum number of common venues.
    #[arg(long, value_name = "K")]
    pub k: Option<u32>,
    /// Maximum day gap per venue.
    #[arg(long, value_name = "D")]
    pub d: Option<u32>,
    /// Largest number of in-window review pairs per venue.
    #[arg(long, value_name = "N")]
    pub pair_budget: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub params: StoreParams,
    /// Edge weights: unweighted, co-review-count or friend-intersection.
    #[arg(long, value_name = "MODE")]
    pub weight: Option<String>,
    /// tsv or dot.
    #[arg(long, default_value = "tsv")]
    pub format: String,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphSource {
    /// Edge-list TSV written by `build` (`-` for stdin).
    #[arg(long, value_name = "FILE", conflicts_with = "store")]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub params: StoreParams,
}

#[derive(Debug, Args)]
pub struct CliqueArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Smallest clique to report [default: 1].
    #[arg(long, value_name = "N")]
    pub min_size: Option<usize>,
    /// Print `size,count` instead of the cliques.
    #[arg(long)]
    pub histogram: bool,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuasiArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Density threshold, decimal or fraction [default: 0.9].
    #[arg(long)]
    pub theta: Option<String>,
    /// Smallest set to report [default: 7].
    #[arg(long, value_name = "N")]
    pub min_size: Option<usize>,
    /// Largest set to grow.
    #[arg(long, value_name = "N")]
    pub max_size: Option<usize>,
    /// Report every qualifying set, not only maximal ones.
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub histogram: bool,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_name = "FILE")]
    pub store: Option<PathBuf>,
    /// Parameter grid and sizes of a published table: table2 (cliques) or
    /// table3 (pseudo-cliques at θ=0.9).
    #[arg(long)]
    pub preset: Option<String>,
    /// clique or quasiclique.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long, value_delimiter = ',', value_name = "K,..")]
    pub k: Vec<u32>,
    #[arg(long, value_delimiter = ',', value_name = "D,..")]
    pub d: Vec<u32>,
    #[arg(long, value_delimiter = ',', value_name = "S,..")]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub theta: Option<String>,
    /// Size cap for the pseudo-clique walk.
    #[arg(long, value_name = "N")]
    pub max_size: Option<usize>,
    #[arg(long, value_name = "N")]
    pub pair_budget: Option<u64>,
    /// Print `k,d,min_size,count` (groups of at least each size).
    #[arg(long, conflicts_with = "text")]
    pub cumulative: bool,
    /// Print the aligned human-readable table.
    #[arg(long)]
    pub text: bool,
    /// Write counts.csv, counts_cumulative.csv and counts.txt here instead.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Exit with an error when a monotonicity check fails.
    #[arg(long)]
    pub check_monotonic: bool,
}

#[derive(Debug, Args)]
pub struct FlagArgs {
    #[command(flatten)]
    pub params: StoreParams,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long, value_name = "N")]
    pub min_size: Option<usize>,
    #[arg(long, value_name = "N")]
    pub max_size: Option<usize>,
    /// Venues listed per pair [default: 50].
    #[arg(long, value_name = "N", conflicts_with = "full_evidence")]
    pub evidence_cap: Option<usize>,
    /// List every qualifying venue.
    #[arg(long)]
    pub full_evidence: bool,
    /// Output file (`-` or omitted for stdout).
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    #[arg(long, value_name = "FILE")]
    pub store: Option<PathBuf>,
    /// Group listings written by `flag`.
    #[arg(long, value_name = "FILE")]
    pub groups: Option<PathBuf>,
    /// CSV with header `user_id,label`.
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Edge-list TSV whose vertices form the second population.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_name = "FILE")]
    pub store: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub groups: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    #[arg(long, value_name = "MODE")]
    pub weight: Option<String>,
    /// dot or tsv.
    #[arg(long, default_value = "dot")]
    pub format: String,
    #[arg(long, value_name = "N")]
    pub pair_budget: Option<u64>,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub users: Option<usize>,
    #[arg(long, value_name = "N")]
    pub venues: Option<usize>,
    /// Uniform background reviews.
    #[arg(long, value_name = "N")]
    pub background: Option<usize>,
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub start_date: Option<String>,
    #[arg(long, value_name = "DAYS")]
    pub span_days: Option<u32>,
    /// Random friends per user; writes users.json when positive.
    #[arg(long, value_name = "N")]
    pub friends: Option<usize>,
    /// Planted group MEMBERSxVENUESxSPREAD, e.g. 11x6x5 (repeatable).
    #[arg(long, value_name = "MxVxS")]
    pub plant: Vec<String>,
    /// Write reviews.json, users.json and truth.json here; without it the
    /// reviews go to stdout.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Ground-truth file when streaming to stdout.
    #[arg(long, value_name = "FILE", conflicts_with = "out_dir")]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Seed of the random graphs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random graphs per check.
    #[arg(long, default_value_t = 300)]
    pub graphs: usize,
    /// Re-check these group listings against --store instead.
    #[arg(long, value_name = "FILE", requires = "store")]
    pub groups: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub store: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(threads) = cli.threads.or(config.threads) {
        if threads == 0 {
            return Err(Usage("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    match cli.command {
        Command::Ingest(args) => commands::ingest(&args, &config),
        Command::Build(args) => commands::build(&args, &config),
        Command::Cliques(args) => commands::cliques(&args, &config),
        Command::Quasicliques(args) => commands::quasicliques(&args, &config),
        Command::Table(args) => commands::table(&args, &config),
        Command::Flag(args) => commands::flag(&args, &config),
        Command::Annotate(args) => commands::annotate(&args, &config),
        Command::Export(args) => commands::export(&args, &config),
        Command::Synth(args) => commands::synth(&args, &config),
        Command::Verify(args) => commands::verify(&args, &config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {message}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
