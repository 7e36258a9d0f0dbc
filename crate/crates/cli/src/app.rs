//! Argument parsing and dispatch behind the `dbgraph` binary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, Settings};
use crate::stages::{Pipeline, Stage};

/// Builds a similarity graph over a corpus of relational databases.
#[derive(Debug, Parser)]
#[command(name = "dbgraph", version)]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(short, long, global = true, default_value = "dbgraph.toml")]
    config: PathBuf,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cosine cutoff in (-1, 1].
    #[arg(long, global = true, allow_hyphen_values = true)]
    threshold: Option<f64>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Overrides `output_dir` from the config.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate the corpus and write its manifest.
    Ingest,
    /// Write one abstract per database.
    Serialize,
    /// Positive pairs, train/val/test splits and training triplets.
    Pairs,
    /// Thresholded all-pairs cosine join over the embeddings.
    Join,
    /// Degree and connected-component statistics.
    GraphStats,
    /// Louvain communities and size distributions.
    Communities,
    /// Per-database property table.
    NodeProps,
    /// Per-edge property table.
    EdgeProps,
    /// Every stage in order.
    All,
}

/// Runs the command line `args` (program name first) and returns the exit
/// code: 0 success, 2 missing input, 3 invariant violation, 1 otherwise.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        threshold: cli.threshold,
        workers: cli.workers,
        output_dir: cli.output_dir,
    };
    let result = Settings::load(&cli.config, &overrides).and_then(|settings| {
        if settings.config.workers > 0 {
            // fails only when a global pool already exists
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(settings.config.workers)
                .build_global();
        }
        let pipeline = Pipeline::new(settings);
        let stage = match cli.command {
            Command::Ingest => Stage::Ingest,
            Command::Serialize => Stage::Serialize,
            Command::Pairs => Stage::Pairs,
            Command::Join => Stage::Join,
            Command::GraphStats => Stage::GraphStats,
            Command::Communities => Stage::Communities,
            Command::NodeProps => Stage::NodeProps,
            Command::EdgeProps => Stage::EdgeProps,
            Command::All => return pipeline.run_all(),
        };
        pipeline.run(stage)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
