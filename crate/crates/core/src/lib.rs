//! Mixed-task chain-of-thought routing.
//!
//! Each incoming question of unknown type is matched against a typed pool of
//! demonstrations. A successful match answers the question with few-shot CoT
//! using the demonstrations of the matched type; a failed match answers it
//! zero-shot and banks the result in a data cache. Once the cache is large
//! enough it is clustered (OPTICS), and every sufficiently large cluster is
//! distilled into a new demonstration family (k-means diversity selection).
//!
//! The crate is organized bottom-up:
//!
//! - [`types`], [`config`], [`store`]: domain values, thresholds, JSONL persistence
//! - [`embedding`]: encoder contract, vector arithmetic, offline hash encoder
//! - [`matching`]: top-1 similarity search and the threshold decision
//! - [`inference`]: prompt construction, LLM contract, answer extraction
//! - [`clustering`]: OPTICS, xi extraction, k-means
//! - [`updater`]: the data cache update
//! - [`router`]: per-question orchestration and baseline strategies
//! - [`harness`]: datasets, streaming runs, evaluation, threshold sweeps, mocks

pub mod clustering;
pub mod config;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod inference;
pub mod matching;
pub mod providers;
pub mod router;
pub mod store;
pub mod transport;
pub mod types;
pub mod updater;

pub use config::{RouterConfig, SelectionStrategy};
pub use embedding::{Embedder, Embedding, Encoder, HashEncoder};
pub use error::{Error, Result};
pub use inference::{AnswerFormat, AnswerKind, LlmProvider};
pub use matching::{MatchDecision, MatchResult};
pub use router::{Router, RouterState, Routed, StrategyKind, StrategyRunner};
pub use types::{CachedRecord, DataCache, DemoPool, Demonstration, RouteOutcome, RoutePath};
pub use updater::UpdateReport;
