use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cotroute::{AnswerFormat, StrategyKind};

#[derive(Debug, Parser)]
#[command(name = "cotroute", version, about = "Route mixed-task questions through a self-updating CoT demo pool")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Router config as JSON; absent fields keep their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Demo pool JSONL.
    #[arg(long, global = true, default_value = "pool.jsonl")]
    pub pool: PathBuf,

    /// Data cache JSONL.
    #[arg(long, global = true, default_value = "cache.jsonl")]
    pub cache: PathBuf,

    /// Overrides the config's rng_seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Encoder spec: hash[:DIM[:SEED]], http[:URL], subprocess:CMD.
    #[arg(long, global = true, env = "COTROUTE_ENCODER")]
    pub encoder: Option<String>,

    /// LLM spec: http[:URL], subprocess:CMD, scripted:PATH.
    #[arg(long, global = true, env = "COTROUTE_LLM")]
    pub llm: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Route one question and persist the updated pool and cache.
    Route(RouteArgs),
    /// Run a batched mixed stream and write its reports.
    Stream(StreamArgs),
    /// Run the cache update on the stored pool and cache.
    Update(UpdateArgs),
    /// Sweep the matching threshold over labelled questions.
    Sweep(SweepArgs),
    /// Inspect or seed the demo pool.
    #[command(subcommand)]
    Pool(PoolCommand),
    /// Render CSV columns as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[arg(long, short)]
    pub question: String,

    /// numeric, yes_no, free_text or multiple_choice:A,B,...
    #[arg(long, default_value = "free_text")]
    pub format: AnswerFormat,

    #[arg(long, default_value_t = StrategyKind::GemCot)]
    pub strategy: StrategyKind,

    /// Gold type, for the few_shot_cot_gold baseline.
    #[arg(long)]
    pub gold_type: Option<String>,

    /// Do not write the pool and cache back.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// JSON array of dataset manifests.
    #[arg(long)]
    pub manifest: PathBuf,

    #[arg(long, default_value_t = 5)]
    pub batches: usize,

    #[arg(long, default_value_t = 400)]
    pub batch_size: usize,

    /// Defaults to --seed, or 0.
    #[arg(long)]
    pub shuffle_seed: Option<u64>,

    #[arg(long, default_value_t = StrategyKind::GemCot)]
    pub strategy: StrategyKind,

    /// Build the initial pool from a directory of <type>.jsonl files
    /// instead of reading --pool.
    #[arg(long)]
    pub seed_dir: Option<PathBuf>,

    /// Match questions concurrently in windows of this size.
    #[arg(long)]
    pub parallel: Option<usize>,

    /// Report directory: batches.csv, outcomes.jsonl, updates.jsonl and the
    /// final pool.jsonl and cache.jsonl.
    #[arg(long, default_value = "stream-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct UpdateArgs {
    /// Update even when the cache is below th_ca.
    #[arg(long)]
    pub force: bool,

    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSONL of {"question", "gold_type"}.
    #[arg(long, conflicts_with = "self_match")]
    pub labeled: Option<PathBuf>,

    /// Use the pool's own demos as the labelled questions.
    #[arg(long)]
    pub self_match: bool,

    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,

    #[arg(long, default_value_t = 0.95)]
    pub hi: f64,

    #[arg(long, default_value_t = 20)]
    pub points: usize,

    /// Writes sweep.csv, histogram.csv and scores.jsonl here; without it the
    /// sweep CSV goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PoolCommand {
    /// Demo counts per type.
    Show {
        /// Print every demo as JSON lines instead.
        #[arg(long)]
        full: bool,
    },
    /// Write --pool from a directory of <type>.jsonl seed files.
    Seed {
        #[arg(long)]
        from_dir: PathBuf,

        /// Overwrite an existing pool file.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub csv: PathBuf,

    #[arg(long, default_value = "batch_index")]
    pub x: String,

    /// Comma-separated columns.
    #[arg(long, value_delimiter = ',', default_value = "accuracy")]
    pub y: Vec<String>,

    #[arg(long)]
    pub title: Option<String>,

    #[arg(long)]
    pub out: PathBuf,
}
