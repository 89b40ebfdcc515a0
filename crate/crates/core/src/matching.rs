//! Type matching: find the pooled demonstration whose question is most
//! similar to the input question, then decide whether the match holds.

use crate::embedding::{Embedder, EncoderError};
use crate::types::{DemoPool, Demonstration};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatchError {
    #[error("cannot match against an empty demo pool")]
    EmptyPool,
    #[error("input question is empty")]
    EmptyQuestion,
    #[error("similarity score is NaN")]
    NanScore,
    #[error("threshold is not finite")]
    BadThreshold,
    #[error(transparent)]
    Encoder(#[from] EncoderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchDecision {
    Matched,
    Unmatched,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub best_demo: Demonstration,
    /// Position of `best_demo` in the pool.
    pub index: usize,
    pub score: f64,
    pub decision: MatchDecision,
}

/// Matched iff `score >= s_thres`; the boundary counts as a match.
pub fn decide_match(score: f64, s_thres: f64) -> Result<MatchDecision, MatchError> {
    if score.is_nan() {
        return Err(MatchError::NanScore);
    }
    if !s_thres.is_finite() {
        return Err(MatchError::BadThreshold);
    }
    Ok(if score >= s_thres {
        MatchDecision::Matched
    } else {
        MatchDecision::Unmatched
    })
}

/// Index and value of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> Result<Option<(usize, f64)>, MatchError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_nan() {
            return Err(MatchError::NanScore);
        }
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    Ok(best)
}

/// Similarity of `question` to every pooled demo question, in pool order.
pub fn similarity_scores(
    question: &str,
    pool: &DemoPool,
    embedder: &Embedder,
) -> Result<Vec<f64>, MatchError> {
    if question.trim().is_empty() {
        return Err(MatchError::EmptyQuestion);
    }
    if pool.is_empty() {
        return Err(MatchError::EmptyPool);
    }
    let query = embedder.embed_one(question)?;
    let texts: Vec<&str> = pool.iter().map(|d| d.question.as_str()).collect();
    let demos = embedder.embed(&texts)?;
    demos
        .iter()
        .map(|d| query.dot(d).map_err(MatchError::from))
        .collect()
}

/// The pooled demonstration with the highest similarity to `question`.
pub fn best_match<'p>(
    question: &str,
    pool: &'p DemoPool,
    embedder: &Embedder,
) -> Result<(usize, &'p Demonstration, f64), MatchError> {
    let scores = similarity_scores(question, pool, embedder)?;
    let (index, score) = argmax(&scores)?.ok_or(MatchError::EmptyPool)?;
    Ok((index, &pool.demos()[index], score))
}

/// [`best_match`] followed by [`decide_match`].
pub fn type_match(
    question: &str,
    pool: &DemoPool,
    embedder: &Embedder,
    s_thres: f64,
) -> Result<MatchResult, MatchError> {
    let (index, demo, score) = best_match(question, pool, embedder)?;
    Ok(MatchResult {
        best_demo: demo.clone(),
        index,
        score,
        decision: decide_match(score, s_thres)?,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::embedding::HashEncoder;

    fn embedder() -> Embedder {
        Embedder::new(Arc::new(HashEncoder::new(256, 3)))
    }

    fn demo(q: &str, t: &str) -> Demonstration {
        Demonstration::new(q, "reasoning.", "answer", t).unwrap()
    }

    #[test]
    fn boundary_is_inclusive() {
        assert_eq!(decide_match(0.35, 0.35).unwrap(), MatchDecision::Matched);
        assert_eq!(decide_match(0.349, 0.35).unwrap(), MatchDecision::Unmatched);
        assert_eq!(decide_match(1.0, 0.35).unwrap(), MatchDecision::Matched);
        assert_eq!(decide_match(f64::NAN, 0.35), Err(MatchError::NanScore));
    }

    #[test]
    fn self_similarity_is_one() {
        let pool = DemoPool::from_demos([demo("How many apples are left?", "arith")]).unwrap();
        let (i, d, s) = best_match("How many apples are left?", &pool, &embedder()).unwrap();
        assert_eq!((i, d.type_label.as_str()), (0, "arith"));
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ties_go_to_first_inserted() {
        // Same question under two types embeds identically.
        let pool = DemoPool::from_demos([demo("same q", "first"), demo("same q", "second")]).unwrap();
        let (i, d, _) = best_match("same q", &pool, &embedder()).unwrap();
        assert_eq!(i, 0);
        assert_eq!(d.type_label, "first");
        assert_eq!(argmax(&[0.5, 0.7, 0.7]).unwrap(), Some((1, 0.7)));
    }

    #[test]
    fn empty_pool_is_an_error() {
        assert_eq!(
            best_match("q", &DemoPool::new(), &embedder()).unwrap_err(),
            MatchError::EmptyPool
        );
    }
}
