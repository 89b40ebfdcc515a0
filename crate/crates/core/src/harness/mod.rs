//! Evaluation plumbing: dataset ingestion and mixed streams, the batch
//! driver and its reports, accuracy, threshold sweeps, SVG plots, and
//! deterministic mock LLMs.

use std::path::PathBuf;

mod dataset;
mod eval;
mod mock;
mod plot;
mod stream;
mod sweep;
pub mod synth;

pub use dataset::{
    build_mixed_stream, load_items, load_manifests, seed_pool_from_dir, shuffle_into_batches, DatasetManifest,
    StreamItem, StreamSpec,
};
pub use eval::{answers_match, evaluate_accuracy, normalize_answer};
pub use mock::{CountingLlm, FlakyLlm, MatchScope, ScriptRule, ScriptedLlm};
pub use plot::{csv_line_chart, line_chart, Series};
pub use stream::{
    run_stream, write_batch_csv, write_outcomes_jsonl, write_updates_jsonl, BatchReport, ExecutionMode, OutcomeRecord,
    StreamRun, BATCH_CSV_HEADER,
};
pub use sweep::{
    default_thresholds, sweep_threshold, write_histogram_csv, write_sweep_csv, LabeledQuestion, ScoreHistogram,
    ScoredQuestion, SweepPoint, SweepResult,
};

use crate::inference::FormatError;
use crate::matching::MatchError;
use crate::store::StoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}:{line}: {message}", path.display())]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("stream needs {needed} questions but only {available} are available")]
    InsufficientData { needed: usize, available: usize },
    #[error("invalid stream spec: {0}")]
    BadSpec(String),
    #[error("{predictions} predictions for {golds} gold answers")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("writing report: {0}")]
    Report(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
