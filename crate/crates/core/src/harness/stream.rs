use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::StreamItem;
use super::eval::answers_match;
use super::HarnessError;
use crate::router::{MatchAttempt, Query, RouteError, Routed, RouterState, StrategyKind, StrategyRunner};
use crate::types::{RouteOutcome, RoutePath};
use crate::updater::UpdateReport;

pub const BATCH_CSV_HEADER: [&str; 7] = [
    "batch_index",
    "n",
    "accuracy",
    "matched_fraction",
    "pool_size",
    "cache_size",
    "updates_triggered",
];

/// How questions within a batch are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    /// One question at a time, in stream order.
    #[default]
    Sequential,
    /// Windows of `window` questions are matched concurrently against one
    /// snapshot; unmatched questions, and every question after a pool
    /// change, are then committed one by one in stream order. With a
    /// deterministic LLM this yields exactly the sequential result.
    Parallel { window: usize },
}

/// One row of the per-batch report. Batches are numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub batch_index: usize,
    pub n: usize,
    pub correct: usize,
    pub errors: usize,
    /// Percentage of questions answered correctly; errors count as wrong.
    pub accuracy: f64,
    pub matched_fraction: f64,
    /// State sizes at the end of the batch.
    pub pool_size: usize,
    pub cache_size: usize,
    pub updates_triggered: usize,
}

/// Run-log line for one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub batch_index: usize,
    pub position: usize,
    pub dataset: String,
    pub gold_answer: String,
    pub gold_type: Option<String>,
    pub correct: bool,
    pub outcome: Option<RouteOutcome>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamRun {
    pub batches: Vec<BatchReport>,
    pub outcomes: Vec<OutcomeRecord>,
    /// Every update that fired, tagged with its batch.
    pub updates: Vec<(usize, UpdateReport)>,
    pub state: RouterState,
}

/// Feeds the batches through `runner` in order, threading the state across
/// batches. A failing question is logged and recorded, leaves the state
/// untouched, and the run continues.
pub fn run_stream(
    runner: &StrategyRunner,
    batches: &[Vec<StreamItem>],
    state: RouterState,
    mode: ExecutionMode,
) -> StreamRun {
    let mut state = state;
    let mut reports = Vec::with_capacity(batches.len());
    let mut outcomes = Vec::new();
    let mut updates = Vec::new();
    for (b, batch) in batches.iter().enumerate() {
        let batch_index = b + 1;
        let results = match mode {
            ExecutionMode::Sequential => run_sequential(runner, batch, &mut state),
            ExecutionMode::Parallel { window } => run_windowed(runner, batch, &mut state, window.max(1)),
        };
        let (mut correct, mut errors, mut matched, mut triggered) = (0, 0, 0, 0);
        for (position, (item, result)) in batch.iter().zip(results).enumerate() {
            let record = match result {
                Ok(routed) => {
                    let ok = answers_match(&routed.outcome.answer, &item.gold_answer, &item.format);
                    correct += usize::from(ok);
                    matched += usize::from(routed.outcome.path == RoutePath::Matched);
                    if let Some(u) = routed.update {
                        triggered += 1;
                        updates.push((batch_index, u));
                    }
                    OutcomeRecord {
                        batch_index,
                        position,
                        dataset: item.dataset.clone(),
                        gold_answer: item.gold_answer.clone(),
                        gold_type: item.gold_type.clone(),
                        correct: ok,
                        outcome: Some(routed.outcome),
                        error: None,
                    }
                }
                Err(e) => {
                    log::warn!("batch {batch_index} question {position}: {e}");
                    errors += 1;
                    OutcomeRecord {
                        batch_index,
                        position,
                        dataset: item.dataset.clone(),
                        gold_answer: item.gold_answer.clone(),
                        gold_type: item.gold_type.clone(),
                        correct: false,
                        outcome: None,
                        error: Some(e.to_string()),
                    }
                }
            };
            outcomes.push(record);
        }
        let n = batch.len();
        let ratio = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        reports.push(BatchReport {
            batch_index,
            n,
            correct,
            errors,
            accuracy: 100.0 * ratio(correct),
            matched_fraction: ratio(matched),
            pool_size: state.pool.len(),
            cache_size: state.cache.len(),
            updates_triggered: triggered,
        });
    }
    StreamRun {
        batches: reports,
        outcomes,
        updates,
        state,
    }
}

fn query(item: &StreamItem) -> Query<'_> {
    Query {
        question: &item.question,
        format: &item.format,
        gold_type: item.gold_type.as_deref(),
    }
}

fn run_sequential(
    runner: &StrategyRunner,
    batch: &[StreamItem],
    state: &mut RouterState,
) -> Vec<Result<Routed, RouteError>> {
    batch
        .iter()
        .map(|item| {
            let result = runner.run(&query(item), state);
            if let Ok(routed) = &result {
                *state = routed.state.clone();
            }
            result
        })
        .collect()
}

fn run_windowed(
    runner: &StrategyRunner,
    batch: &[StreamItem],
    state: &mut RouterState,
    window: usize,
) -> Vec<Result<Routed, RouteError>> {
    // Baselines never change the state, so every question is independent.
    if runner.kind() != StrategyKind::GemCot {
        let snapshot = state.clone();
        return batch.par_iter().map(|item| runner.run(&query(item), &snapshot)).collect();
    }
    let router = runner.router();
    let mut results = Vec::with_capacity(batch.len());
    for chunk in batch.chunks(window) {
        let snapshot = state.clone();
        let attempts: Vec<Result<MatchAttempt, RouteError>> = chunk
            .par_iter()
            .map(|item| router.try_matched(&item.question, &item.format, &snapshot))
            .collect();
        for (item, attempt) in chunk.iter().zip(attempts) {
            let pool_unchanged = Arc::ptr_eq(&state.pool, &snapshot.pool);
            let result = match attempt {
                Ok(MatchAttempt::Matched(routed)) if pool_unchanged => Ok(Routed {
                    state: state.clone(),
                    ..routed
                }),
                Err(e) if pool_unchanged => Err(e),
                _ => router.route_one(&item.question, &item.format, state),
            };
            if let Ok(routed) = &result {
                *state = routed.state.clone();
            }
            results.push(result);
        }
    }
    results
}

fn report_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Report(e.to_string())
}

/// Batch report as CSV with fixed decimal formatting, so identical runs
/// produce identical bytes.
pub fn write_batch_csv<W: Write>(out: W, reports: &[BatchReport]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BATCH_CSV_HEADER).map_err(report_err)?;
    for r in reports {
        w.write_record([
            r.batch_index.to_string(),
            r.n.to_string(),
            format!("{:.4}", r.accuracy),
            format!("{:.4}", r.matched_fraction),
            r.pool_size.to_string(),
            r.cache_size.to_string(),
            r.updates_triggered.to_string(),
        ])
        .map_err(report_err)?;
    }
    w.flush().map_err(report_err)
}

pub fn write_outcomes_jsonl<W: Write>(mut out: W, records: &[OutcomeRecord]) -> Result<(), HarnessError> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(report_err)?;
        out.write_all(b"\n").map_err(report_err)?;
    }
    out.flush().map_err(report_err)
}

/// One JSON object per update: `{"batch_index": ..., "report": {...}}`.
pub fn write_updates_jsonl<W: Write>(mut out: W, updates: &[(usize, UpdateReport)]) -> Result<(), HarnessError> {
    #[derive(Serialize)]
    struct Line<'a> {
        batch_index: usize,
        report: &'a UpdateReport,
    }
    for (batch_index, report) in updates {
        serde_json::to_writer(
            &mut out,
            &Line {
                batch_index: *batch_index,
                report,
            },
        )
        .map_err(report_err)?;
        out.write_all(b"\n").map_err(report_err)?;
    }
    out.flush().map_err(report_err)
}
