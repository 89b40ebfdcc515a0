//! Data cache update: once the cache holds `th_ca` records, cluster the
//! cached questions, turn every cluster of at least `th_cls` records into a
//! new demonstration family, and drop those clusters from the cache.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{self, kmeans_run, sort_by_centroid_distance, ClusterError};
use crate::config::{RouterConfig, SelectionStrategy};
use crate::embedding::{Embedder, Embedding, EncoderError};
use crate::types::{CachedRecord, DataCache, DemoPool, Demonstration, InvalidValue};

/// Prefix of every mined type label: `auto-{epoch}-{cluster}`.
pub const AUTO_LABEL_PREFIX: &str = "auto-";
/// Suffix marking a family whose demos are ranked against each query.
pub const RANKED_SUFFIX: &str = ":ranked";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UpdateError {
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error("cannot select {k} demos from a cluster of {n}")]
    ClusterTooSmall { k: usize, n: usize },
    #[error(transparent)]
    Invalid(#[from] InvalidValue),
}

/// A family that received fewer than `k` demos.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub type_label: String,
    pub selected: usize,
    pub wanted: usize,
}

/// Audit record of one update. Serialized as one JSON line in run logs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub triggered: bool,
    pub clusters_found: usize,
    pub clusters_accepted: usize,
    pub demos_added: usize,
    pub records_removed: usize,
    pub new_type_labels: Vec<String>,
    /// Sizes of the accepted clusters, in label order.
    pub accepted_sizes: Vec<usize>,
    /// Demos taken as closest-to-centroid because no candidate of their
    /// sub-cluster passed the filters.
    pub fallback_picks: usize,
    pub shortfalls: Vec<Shortfall>,
    pub cache_size_before: usize,
    pub cache_size_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    pub pool: DemoPool,
    pub cache: DataCache,
    pub report: UpdateReport,
}

/// Runs the update when the cache holds at least `th_ca` records; otherwise
/// returns the inputs unchanged with `triggered = false`.
pub fn maybe_update(
    pool: &DemoPool,
    cache: &DataCache,
    cfg: &RouterConfig,
    embedder: &Embedder,
) -> Result<UpdateOutcome, UpdateError> {
    if cache.len() < cfg.th_ca {
        return Ok(UpdateOutcome {
            pool: pool.clone(),
            cache: cache.clone(),
            report: UpdateReport {
                cache_size_before: cache.len(),
                cache_size_after: cache.len(),
                ..Default::default()
            },
        });
    }
    force_update(pool, cache, cfg, embedder)
}

/// The update without the cache-size trigger. Nothing is modified unless
/// every step succeeds.
pub fn force_update(
    pool: &DemoPool,
    cache: &DataCache,
    cfg: &RouterConfig,
    embedder: &Embedder,
) -> Result<UpdateOutcome, UpdateError> {
    let mut report = UpdateReport {
        triggered: true,
        cache_size_before: cache.len(),
        ..Default::default()
    };
    if cache.is_empty() {
        report.cache_size_after = 0;
        return Ok(UpdateOutcome {
            pool: pool.clone(),
            cache: cache.clone(),
            report,
        });
    }

    let questions: Vec<&str> = cache.iter().map(|r| r.question.as_str()).collect();
    let embeddings = embedder.embed(&questions)?;
    let clusters = clustering::optics(&embeddings, cfg.optics_min_samples, cfg.optics_max_eps, cfg.optics_xi)?
        .clusters();
    report.clusters_found = clusters.len();

    let epoch = next_epoch(pool);
    let mut new_pool = pool.clone();
    let mut removed = HashSet::new();
    for (cluster_index, members) in clusters.iter().enumerate() {
        if members.len() < cfg.th_cls {
            continue;
        }
        let mut label = format!("{AUTO_LABEL_PREFIX}{epoch}-{cluster_index}");
        if cfg.selection_strategy == SelectionStrategy::Similarity {
            label.push_str(RANKED_SUFFIX);
        }
        let records: Vec<CachedRecord> = members.iter().map(|&i| cache.records()[i].clone()).collect();
        let member_embeddings: Vec<Embedding> = members.iter().map(|&i| embeddings[i].clone()).collect();
        let selection = select_from_embeddings(
            &records,
            &member_embeddings,
            cfg.k,
            cfg,
            cfg.selection_strategy,
            &label,
            cfg.rng_seed.wrapping_add(cluster_index as u64),
        )?;
        let wanted = match cfg.selection_strategy {
            SelectionStrategy::Similarity => records.len(),
            _ => cfg.k,
        };
        if selection.demos.len() < wanted {
            report.shortfalls.push(Shortfall {
                type_label: label.clone(),
                selected: selection.demos.len(),
                wanted,
            });
        }
        report.fallback_picks += selection.fallback_picks;
        report.demos_added += selection.demos.len();
        for demo in selection.demos {
            new_pool.push(demo)?;
        }
        report.clusters_accepted += 1;
        report.accepted_sizes.push(members.len());
        report.records_removed += members.len();
        report.new_type_labels.push(label);
        removed.extend(members.iter().copied());
    }

    let new_cache = cache.without(&removed);
    report.cache_size_after = new_cache.len();
    Ok(UpdateOutcome {
        pool: new_pool,
        cache: new_cache,
        report,
    })
}

/// One past the largest epoch among the pool's mined labels (0 if none), so
/// fresh labels never collide with existing ones.
pub fn next_epoch(pool: &DemoPool) -> u64 {
    pool.type_labels()
        .iter()
        .filter_map(|l| l.strip_prefix(AUTO_LABEL_PREFIX))
        .filter_map(|rest| rest.split('-').next()?.parse::<u64>().ok())
        .max()
        .map_or(0, |e| e + 1)
}

/// Whether a family's demos are ranked per query instead of used wholesale.
pub fn is_query_ranked(type_label: &str) -> bool {
    type_label.ends_with(RANKED_SUFFIX)
}

/// Demos chosen from one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub demos: Vec<Demonstration>,
    pub fallback_picks: usize,
}

/// Turns one cluster of cached records into demonstrations labelled
/// `type_label`, reusing the cached rationales and answers verbatim.
///
/// Records without a rationale or answer are never selected, and a question
/// text is used at most once.
pub fn select_demos(
    records: &[CachedRecord],
    k: usize,
    cfg: &RouterConfig,
    embedder: &Embedder,
    strategy: SelectionStrategy,
    type_label: &str,
) -> Result<Selection, UpdateError> {
    if records.is_empty() || k > records.len() {
        return Err(UpdateError::ClusterTooSmall { k, n: records.len() });
    }
    let questions: Vec<&str> = records.iter().map(|r| r.question.as_str()).collect();
    let embeddings = match strategy {
        SelectionStrategy::Diversity => embedder.embed(&questions)?,
        _ => Vec::new(),
    };
    select_from_embeddings(records, &embeddings, k, cfg, strategy, type_label, cfg.rng_seed)
}

fn select_from_embeddings(
    records: &[CachedRecord],
    embeddings: &[Embedding],
    k: usize,
    cfg: &RouterConfig,
    strategy: SelectionStrategy,
    type_label: &str,
    seed: u64,
) -> Result<Selection, UpdateError> {
    if k == 0 || k > records.len() {
        return Err(UpdateError::ClusterTooSmall { k, n: records.len() });
    }
    let to_demo = |r: &CachedRecord| Demonstration {
        question: r.question.clone(),
        rationale: r.rationale.clone(),
        answer: r.answer.clone(),
        type_label: type_label.to_owned(),
    };
    let mut taken: HashSet<&str> = HashSet::new();
    let mut demos = Vec::new();
    let mut fallback_picks = 0;

    match strategy {
        SelectionStrategy::Diversity => {
            let km = kmeans_run(embeddings, k, cfg.rng_seed)?;
            for (sub, centroid) in km.centroids.iter().enumerate() {
                let members: Vec<usize> = (0..records.len()).filter(|&i| km.labels[i] == sub).collect();
                let points: Vec<&Embedding> = members.iter().map(|&i| &embeddings[i]).collect();
                let walk: Vec<&CachedRecord> = sort_by_centroid_distance(&points, centroid)
                    .into_iter()
                    .map(|j| &records[members[j]])
                    .filter(|r| !r.is_incomplete() && !taken.contains(r.question.as_str()))
                    .collect();
                let pick = match walk
                    .iter()
                    .find(|r| passes_filters(&r.question, &r.rationale, cfg))
                {
                    Some(r) => Some(*r),
                    None => {
                        let closest = walk.first().copied();
                        if closest.is_some() {
                            fallback_picks += 1;
                        }
                        closest
                    }
                };
                if let Some(r) = pick {
                    taken.insert(r.question.as_str());
                    demos.push(to_demo(r));
                }
            }
        }
        SelectionStrategy::Random => {
            let mut order: Vec<usize> = (0..records.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            for i in order {
                if demos.len() == k {
                    break;
                }
                let r = &records[i];
                if !r.is_incomplete() && taken.insert(r.question.as_str()) {
                    demos.push(to_demo(r));
                }
            }
        }
        SelectionStrategy::Similarity => {
            for r in records {
                if !r.is_incomplete() && taken.insert(r.question.as_str()) {
                    demos.push(to_demo(r));
                }
            }
        }
    }
    Ok(Selection { demos, fallback_picks })
}

/// Question of at most `max_question_tokens` tokens and rationale of at most
/// `max_rationale_steps` steps; both bounds inclusive.
pub fn passes_filters(question: &str, rationale: &str, cfg: &RouterConfig) -> bool {
    count_tokens(question) <= cfg.max_question_tokens
        && count_reasoning_steps(rationale) <= cfg.max_rationale_steps
}

/// Whitespace-delimited tokens.
pub fn count_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Non-empty segments after splitting on newlines and on periods followed by
/// whitespace or end of text. Abbreviations are not special-cased.
pub fn count_reasoning_steps(rationale: &str) -> usize {
    let mut steps = 0;
    for line in rationale.lines() {
        let chars: Vec<(usize, char)> = line.char_indices().collect();
        let mut start = 0;
        for (pos, &(byte, c)) in chars.iter().enumerate() {
            let at_boundary = c == '.'
                && chars.get(pos + 1).is_none_or(|&(_, next)| next.is_whitespace());
            if at_boundary {
                if !line[start..byte].trim().is_empty() {
                    steps += 1;
                }
                start = byte + c.len_utf8();
            }
        }
        if !line[start..].trim().is_empty() {
            steps += 1;
        }
    }
    steps
}
