//! Per-question orchestration: type matching, then either few-shot CoT with
//! the matched family's demos or zero-shot CoT plus caching and a possible
//! cache update. Also hosts the comparison strategies.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RouterConfig;
use crate::embedding::Embedder;
use crate::inference::{derive_answer, derive_direct, AnswerFormat, Derivation, LlmError, LlmProvider};
use crate::matching::{self, MatchDecision, MatchError};
use crate::types::{CachedRecord, DataCache, DemoPool, Demonstration, InvalidValue, RouteOutcome, RoutePath};
use crate::updater::{is_query_ranked, maybe_update, UpdateError, UpdateReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouteFailure {
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Invalid(#[from] InvalidValue),
    #[error("strategy needs a gold type label")]
    MissingGoldType,
    #[error("no demonstrations of gold type `{0}`")]
    UnknownGoldType(String),
}

/// A failed question. The router state is left as it was.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("routing {question:?} failed: {source}")]
pub struct RouteError {
    pub question: String,
    #[source]
    pub source: RouteFailure,
}

impl RouteError {
    fn new(question: &str, source: impl Into<RouteFailure>) -> Self {
        Self {
            question: question.to_owned(),
            source: source.into(),
        }
    }
}

/// Immutable (pool, cache) snapshot. Cloning is cheap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RouterState {
    pub pool: Arc<DemoPool>,
    pub cache: Arc<DataCache>,
}

impl RouterState {
    pub fn new(pool: DemoPool, cache: DataCache) -> Self {
        Self {
            pool: Arc::new(pool),
            cache: Arc::new(cache),
        }
    }
}

/// Result of routing one question: the outcome, the successor state, and
/// the update report when the question triggered an update.
#[derive(Debug, Clone, PartialEq)]
pub struct Routed {
    pub outcome: RouteOutcome,
    pub state: RouterState,
    pub update: Option<UpdateReport>,
}

/// Outcome of [`Router::try_matched`].
#[derive(Debug, Clone, PartialEq)]
pub enum MatchAttempt {
    Matched(Routed),
    Unmatched { similarity: Option<f64> },
}

/// Configuration plus providers. Holds no mutable state; the caller threads
/// [`RouterState`] through successive calls.
pub struct Router {
    cfg: RouterConfig,
    embedder: Embedder,
    llm: Arc<dyn LlmProvider>,
}

impl fmt::Debug for Router {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Router")
            .field("cfg", &self.cfg)
            .field("embedder", &self.embedder)
            .field("llm", &self.llm.name())
            .finish()
    }
}

impl Router {
    pub fn new(cfg: RouterConfig, embedder: Embedder, llm: Arc<dyn LlmProvider>) -> Self {
        Self { cfg, embedder, llm }
    }

    pub fn config(&self) -> &RouterConfig {
        &self.cfg
    }

    pub fn embedder(&self) -> &Embedder {
        &self.embedder
    }

    pub fn llm(&self) -> &dyn LlmProvider {
        self.llm.as_ref()
    }

    /// Routes one question. An empty pool always takes the unmatched path.
    pub fn route_one(&self, question: &str, fmt: &AnswerFormat, state: &RouterState) -> Result<Routed, RouteError> {
        match self.try_matched(question, fmt, state)? {
            MatchAttempt::Matched(routed) => Ok(routed),
            MatchAttempt::Unmatched { similarity } => self.route_unmatched(question, fmt, state, similarity),
        }
    }

    /// Type matching and, on a match, the few-shot derivation. Reads the
    /// pool only, so it is safe to run concurrently on one snapshot.
    pub fn try_matched(&self, question: &str, fmt: &AnswerFormat, state: &RouterState) -> Result<MatchAttempt, RouteError> {
        let err = |e: RouteFailure| RouteError::new(question, e);
        if question.trim().is_empty() {
            return Err(err(MatchError::EmptyQuestion.into()));
        }
        if state.pool.is_empty() {
            return Ok(MatchAttempt::Unmatched { similarity: None });
        }
        let m = matching::type_match(question, &state.pool, &self.embedder, self.cfg.s_thres)
            .map_err(|e| err(e.into()))?;
        if m.decision == MatchDecision::Unmatched {
            return Ok(MatchAttempt::Unmatched { similarity: Some(m.score) });
        }
        let type_label = m.best_demo.type_label;
        let demos = self
            .prompt_demos(question, &state.pool, &type_label)
            .map_err(|e| err(e.into()))?;
        let d = derive_answer(question, Some(&demos), fmt, self.llm.as_ref(), &self.cfg)
            .map_err(|e| err(e.into()))?;
        Ok(MatchAttempt::Matched(Routed {
            outcome: RouteOutcome {
                question: question.to_owned(),
                answer: d.answer,
                rationale: d.rationale,
                path: RoutePath::Matched,
                matched_type: Some(type_label),
                similarity: Some(m.score),
                demos_used: demos.len(),
            },
            state: state.clone(),
            update: None,
        }))
    }

    fn route_unmatched(
        &self,
        question: &str,
        fmt: &AnswerFormat,
        state: &RouterState,
        similarity: Option<f64>,
    ) -> Result<Routed, RouteError> {
        let err = |e: RouteFailure| RouteError::new(question, e);
        let d = derive_answer(question, None, fmt, self.llm.as_ref(), &self.cfg).map_err(|e| err(e.into()))?;
        let mut cache = (*state.cache).clone();
        cache
            .push(CachedRecord::new(question, d.rationale.clone(), d.answer.clone()).map_err(|e| err(e.into()))?)
            .map_err(|e| err(e.into()))?;
        let (next, update) = if cache.len() >= self.cfg.th_ca {
            let updated = maybe_update(&state.pool, &cache, &self.cfg, &self.embedder).map_err(|e| err(e.into()))?;
            (RouterState::new(updated.pool, updated.cache), Some(updated.report))
        } else {
            (
                RouterState {
                    pool: Arc::clone(&state.pool),
                    cache: Arc::new(cache),
                },
                None,
            )
        };
        Ok(Routed {
            outcome: RouteOutcome {
                question: question.to_owned(),
                answer: d.answer,
                rationale: d.rationale,
                path: RoutePath::Unmatched,
                matched_type: None,
                similarity,
                demos_used: 0,
            },
            state: next,
            update,
        })
    }

    /// Demos of `type_label` in insertion order, or the top `k` by similarity
    /// for query-ranked families; then capped at `max_prompt_demos`.
    fn prompt_demos<'p>(
        &self,
        question: &str,
        pool: &'p DemoPool,
        type_label: &str,
    ) -> Result<Vec<&'p Demonstration>, MatchError> {
        let mut demos = pool.demos_of_type(type_label);
        if is_query_ranked(type_label) {
            let query = self.embedder.embed_one(question)?;
            let texts: Vec<&str> = demos.iter().map(|d| d.question.as_str()).collect();
            let embedded = self.embedder.embed(&texts)?;
            let mut scored = Vec::with_capacity(demos.len());
            for (i, e) in embedded.iter().enumerate() {
                let s = query.dot(e)?;
                if s.is_nan() {
                    return Err(MatchError::NanScore);
                }
                scored.push((i, s));
            }
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            demos = scored.iter().take(self.cfg.k).map(|&(i, _)| demos[i]).collect();
        }
        if let Some(cap) = self.cfg.max_prompt_demos {
            demos.truncate(cap);
        }
        Ok(demos)
    }
}

/// Answering strategy: the router itself or one of the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    #[default]
    GemCot,
    /// `A: The answer is`, no rationale.
    ZeroShot,
    ZeroShotCot,
    /// Few-shot CoT with the demos of the question's gold type.
    FewShotCotGold,
    /// One random demo per type of the initial pool, the same for every question.
    GeneralCot,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::GemCot,
        StrategyKind::ZeroShot,
        StrategyKind::ZeroShotCot,
        StrategyKind::FewShotCotGold,
        StrategyKind::GeneralCot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::GemCot => "gem_cot",
            StrategyKind::ZeroShot => "zero_shot",
            StrategyKind::ZeroShotCot => "zero_shot_cot",
            StrategyKind::FewShotCotGold => "few_shot_cot_gold",
            StrategyKind::GeneralCot => "general_cot",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown strategy `{s}` (expected one of gem_cot, zero_shot, zero_shot_cot, few_shot_cot_gold, general_cot)"))
    }
}

/// One question as seen by a strategy. Only the gold-label baseline reads
/// `gold_type`.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub question: &'a str,
    pub format: &'a AnswerFormat,
    pub gold_type: Option<&'a str>,
}

/// Runs a fixed strategy over successive questions.
#[derive(Debug)]
pub struct StrategyRunner {
    router: Router,
    kind: StrategyKind,
    general_demos: Vec<Demonstration>,
}

impl StrategyRunner {
    /// `initial_pool` fixes the general-CoT prompt for the whole run.
    pub fn new(router: Router, kind: StrategyKind, initial_pool: &DemoPool) -> Self {
        let general_demos = if kind == StrategyKind::GeneralCot {
            general_cot_demos(initial_pool, router.cfg.rng_seed)
        } else {
            Vec::new()
        };
        Self {
            router,
            kind,
            general_demos,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn router(&self) -> &Router {
        &self.router
    }

    /// The general-CoT demo set (empty for other strategies).
    pub fn general_demos(&self) -> &[Demonstration] {
        &self.general_demos
    }

    pub fn run(&self, query: &Query<'_>, state: &RouterState) -> Result<Routed, RouteError> {
        let q = query.question;
        let cfg = &self.router.cfg;
        let llm = self.router.llm.as_ref();
        let err = |e: RouteFailure| RouteError::new(q, e);
        let (d, demos_used): (Derivation, usize) = match self.kind {
            StrategyKind::GemCot => return self.router.route_one(q, query.format, state),
            StrategyKind::ZeroShot => (derive_direct(q, query.format, llm, cfg).map_err(|e| err(e.into()))?, 0),
            StrategyKind::ZeroShotCot => (derive_answer(q, None, query.format, llm, cfg).map_err(|e| err(e.into()))?, 0),
            StrategyKind::FewShotCotGold => {
                let gold = query.gold_type.ok_or_else(|| err(RouteFailure::MissingGoldType))?;
                let demos = state.pool.demos_of_type(gold);
                if demos.is_empty() {
                    return Err(err(RouteFailure::UnknownGoldType(gold.to_owned())));
                }
                let d = derive_answer(q, Some(&demos), query.format, llm, cfg).map_err(|e| err(e.into()))?;
                (d, demos.len())
            }
            StrategyKind::GeneralCot => {
                let demos: Vec<&Demonstration> = self.general_demos.iter().collect();
                if demos.is_empty() {
                    return Err(err(LlmError::Prompt(crate::inference::PromptError::NoDemos).into()));
                }
                let d = derive_answer(q, Some(&demos), query.format, llm, cfg).map_err(|e| err(e.into()))?;
                (d, demos.len())
            }
        };
        Ok(Routed {
            outcome: RouteOutcome {
                question: q.to_owned(),
                answer: d.answer,
                rationale: d.rationale,
                path: RoutePath::Baseline,
                matched_type: None,
                similarity: None,
                demos_used,
            },
            state: state.clone(),
            update: None,
        })
    }
}

/// One seeded random demo per type, types in first-appearance order.
pub fn general_cot_demos(pool: &DemoPool, seed: u64) -> Vec<Demonstration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.type_labels()
        .into_iter()
        .map(|t| {
            let of_type = pool.demos_of_type(t);
            of_type[rng.gen_range(0..of_type.len())].clone()
        })
        .collect()
}
