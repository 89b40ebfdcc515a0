use thiserror::Error;

use crate::clustering::ClusterError;
use crate::config::ConfigError;
use crate::embedding::EncoderError;
use crate::harness::HarnessError;
use crate::inference::LlmError;
use crate::matching::MatchError;
use crate::providers::ProviderError;
use crate::router::RouteError;
use crate::store::StoreError;
use crate::updater::UpdateError;

/// Crate-wide error. Each module has its own error type; this one unifies
/// them for callers that do not care which stage failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
