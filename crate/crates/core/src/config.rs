//! Router thresholds and knobs.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// How a mined cluster is turned into demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    /// k-means over the cluster, one filtered representative per sub-cluster.
    #[default]
    Diversity,
    /// Keep the whole cluster; rank demos against each query at match time.
    Similarity,
    /// k uniformly sampled records.
    Random,
}

/// All thresholds and knobs. The JSON config file mirrors these field names;
/// absent fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RouterConfig {
    /// Similarity threshold for a type match.
    pub s_thres: f64,
    /// Cache size that triggers an update.
    pub th_ca: usize,
    /// Minimum cluster size for mining a new family.
    pub th_cls: usize,
    /// Demonstrations per new family.
    pub k: usize,
    pub optics_min_samples: usize,
    pub optics_xi: f64,
    /// `None` means unbounded.
    pub optics_max_eps: Option<f64>,
    pub max_question_tokens: usize,
    pub max_rationale_steps: usize,
    pub llm_temperature: f64,
    pub llm_top_p: f64,
    pub rng_seed: u64,
    pub selection_strategy: SelectionStrategy,
    /// Answer zero-shot questions with one call and extract from the
    /// reasoning itself instead of a second answer-trigger call.
    pub single_stage_zero_shot: bool,
    /// Attempts per LLM call; only transport failures are retried.
    pub llm_max_attempts: u32,
    /// Base delay of the exponential backoff between attempts.
    pub llm_backoff_ms: u64,
    /// Cap on demos placed in a matched-path prompt (`None` = all of the type).
    pub max_prompt_demos: Option<usize>,
    /// Texts per encoder request.
    pub encode_batch_size: usize,
}

impl Default for RouterConfig {
    fn default() -> Self {
        Self {
            s_thres: 0.35,
            th_ca: 200,
            th_cls: 50,
            k: 6,
            optics_min_samples: 5,
            optics_xi: 0.05,
            optics_max_eps: None,
            max_question_tokens: 60,
            max_rationale_steps: 5,
            llm_temperature: 1.0,
            llm_top_p: 1.0,
            rng_seed: 0,
            selection_strategy: SelectionStrategy::Diversity,
            single_stage_zero_shot: false,
            llm_max_attempts: 3,
            llm_backoff_ms: 200,
            max_prompt_demos: None,
            encode_batch_size: 64,
        }
    }
}

/// Every violated invariant, reported together.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid router config: {}", self.violations.join("; "))
    }
}

impl RouterConfig {
    pub fn validate(self) -> Result<Self, ConfigError> {
        let mut v = Vec::new();
        if !self.s_thres.is_finite() {
            v.push(format!("s_thres must be finite (got {})", self.s_thres));
        }
        if self.th_cls < 1 {
            v.push("th_cls must be at least 1".to_owned());
        }
        if self.th_ca < self.th_cls {
            v.push(format!(
                "th_ca ({}) must be >= th_cls ({})",
                self.th_ca, self.th_cls
            ));
        }
        if self.k < 1 {
            v.push("k must be at least 1".to_owned());
        } else if self.k > self.th_cls {
            v.push(format!("k ({}) must not exceed th_cls ({})", self.k, self.th_cls));
        }
        if self.optics_min_samples < 2 {
            v.push(format!(
                "optics_min_samples must be >= 2 (got {})",
                self.optics_min_samples
            ));
        }
        if !(self.optics_xi > 0.0 && self.optics_xi < 1.0) {
            v.push(format!("optics_xi must lie in (0, 1) (got {})", self.optics_xi));
        }
        if let Some(eps) = self.optics_max_eps {
            if eps.is_nan() || eps < 0.0 {
                v.push(format!("optics_max_eps must be >= 0 (got {eps})"));
            }
        }
        if !(self.llm_temperature.is_finite() && self.llm_temperature >= 0.0) {
            v.push(format!("llm_temperature must be >= 0 (got {})", self.llm_temperature));
        }
        if !(self.llm_top_p > 0.0 && self.llm_top_p <= 1.0) {
            v.push(format!("llm_top_p must lie in (0, 1] (got {})", self.llm_top_p));
        }
        if self.llm_max_attempts < 1 {
            v.push("llm_max_attempts must be at least 1".to_owned());
        }
        if self.max_prompt_demos == Some(0) {
            v.push("max_prompt_demos must be at least 1 when set".to_owned());
        }
        if self.encode_batch_size < 1 {
            v.push("encode_batch_size must be at least 1".to_owned());
        }
        if v.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError { violations: v })
        }
    }

    /// Reads a JSON config file and validates it.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, crate::Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| crate::store::StoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| ConfigError {
            violations: vec![format!("{}: {e}", path.display())],
        })?;
        Ok(cfg.validate()?)
    }
}
