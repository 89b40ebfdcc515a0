use std::io::Write;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::embedding::Embedder;
use crate::matching::{argmax, similarity_scores};
use crate::types::DemoPool;

/// A question with the type it should match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledQuestion {
    pub question: String,
    pub gold_type: String,
}

/// Top-1 match of one labelled question, independent of any threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredQuestion {
    pub question: String,
    pub gold_type: String,
    pub best_type: String,
    pub score: f64,
    /// Whether the top-1 demo has the gold type.
    pub type_correct: bool,
}

/// Type-matching quality at one threshold.
///
/// A question is a true positive when it is matched to its gold type, a
/// false positive when matched to another type, a false negative when
/// rejected although its top-1 type was right, and a true negative when a
/// wrong top-1 type is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub matched: usize,
    pub true_positives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// (true positives + true negatives) / questions, in [0, 1].
    pub accuracy: f64,
}

/// Counts of top-1 scores per bin of width [`ScoreHistogram::WIDTH`] over
/// [-1, 1], split by whether the top-1 type was correct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreHistogram {
    pub correct: Vec<usize>,
    pub incorrect: Vec<usize>,
}

impl ScoreHistogram {
    pub const WIDTH: f64 = 0.05;
    pub const BINS: usize = 40;

    fn new() -> Self {
        Self {
            correct: vec![0; Self::BINS],
            incorrect: vec![0; Self::BINS],
        }
    }

    /// Bin of a score; 1.0 falls in the last bin.
    pub fn bin(score: f64) -> usize {
        let b = ((score + 1.0) / Self::WIDTH).floor();
        (b.max(0.0) as usize).min(Self::BINS - 1)
    }

    pub fn bin_start(bin: usize) -> f64 {
        -1.0 + bin as f64 * Self::WIDTH
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub scores: Vec<ScoredQuestion>,
    pub histogram: ScoreHistogram,
}

/// `n` evenly spaced thresholds from `lo` to `hi` inclusive.
pub fn default_thresholds(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Scores every question once, then evaluates each threshold on the scores.
pub fn sweep_threshold(
    pool: &DemoPool,
    labeled: &[LabeledQuestion],
    embedder: &Embedder,
    thresholds: &[f64],
) -> Result<SweepResult, HarnessError> {
    let mut scores = Vec::with_capacity(labeled.len());
    let mut histogram = ScoreHistogram::new();
    for lq in labeled {
        let all = similarity_scores(&lq.question, pool, embedder)?;
        let (index, score) = argmax(&all)?.expect("pool is non-empty");
        let best_type = pool.demos()[index].type_label.clone();
        let type_correct = best_type == lq.gold_type;
        let bin = ScoreHistogram::bin(score);
        if type_correct {
            histogram.correct[bin] += 1;
        } else {
            histogram.incorrect[bin] += 1;
        }
        scores.push(ScoredQuestion {
            question: lq.question.clone(),
            gold_type: lq.gold_type.clone(),
            best_type,
            score,
            type_correct,
        });
    }

    let n = scores.len();
    let positives = scores.iter().filter(|s| s.type_correct).count();
    let points = thresholds
        .iter()
        .map(|&threshold| {
            let matched = scores.iter().filter(|s| s.score >= threshold).count();
            let tp = scores.iter().filter(|s| s.score >= threshold && s.type_correct).count();
            let tn = scores.iter().filter(|s| s.score < threshold && !s.type_correct).count();
            let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            let precision = div(tp, matched);
            let recall = div(tp, positives);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            SweepPoint {
                threshold,
                matched,
                true_positives: tp,
                precision,
                recall,
                f1,
                accuracy: div(tp + tn, n),
            }
        })
        .collect();
    Ok(SweepResult {
        points,
        scores,
        histogram,
    })
}

fn report_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Report(e.to_string())
}

/// `threshold,matched,true_positives,precision,recall,f1,accuracy`.
pub fn write_sweep_csv<W: Write>(out: W, points: &[SweepPoint]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "matched", "true_positives", "precision", "recall", "f1", "accuracy"])
        .map_err(report_err)?;
    for p in points {
        w.write_record([
            format!("{:.4}", p.threshold),
            p.matched.to_string(),
            p.true_positives.to_string(),
            format!("{:.6}", p.precision),
            format!("{:.6}", p.recall),
            format!("{:.6}", p.f1),
            format!("{:.6}", p.accuracy),
        ])
        .map_err(report_err)?;
    }
    w.flush().map_err(report_err)
}

/// `bin_start,bin_end,correct,incorrect`.
pub fn write_histogram_csv<W: Write>(out: W, h: &ScoreHistogram) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_start", "bin_end", "correct", "incorrect"])
        .map_err(report_err)?;
    for bin in 0..ScoreHistogram::BINS {
        let start = ScoreHistogram::bin_start(bin);
        w.write_record([
            format!("{start:.2}"),
            format!("{:.2}", start + ScoreHistogram::WIDTH),
            h.correct[bin].to_string(),
            h.incorrect[bin].to_string(),
        ])
        .map_err(report_err)?;
    }
    w.flush().map_err(report_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_bins_cover_the_range() {
        assert_eq!(ScoreHistogram::bin(-1.0), 0);
        assert_eq!(ScoreHistogram::bin(1.0), ScoreHistogram::BINS - 1);
        assert_eq!(ScoreHistogram::bin(0.0), 20);
        assert_eq!(ScoreHistogram::bin(0.36), 27);
    }

    #[test]
    fn thresholds_are_evenly_spaced() {
        let t = default_thresholds(0.0, 0.95, 20);
        assert_eq!(t.len(), 20);
        assert_eq!(t[0], 0.0);
        assert!((t[19] - 0.95).abs() < 1e-12);
        assert!((t[7] - 0.35).abs() < 1e-12);
    }
}
