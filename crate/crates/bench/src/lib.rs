//! Seeded inputs shared by the benchmarks.

use std::sync::Arc;

use cotroute::harness::synth::FamilyGen;
use cotroute::harness::ScriptedLlm;
use cotroute::{DataCache, DemoPool, Demonstration, Embedder, HashEncoder, Router, RouterConfig, RouterState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `blobs` Gaussian-ish clusters of `per_blob` points in `dim` dimensions,
/// centers on a unit-spaced diagonal.
pub fn blobs(blobs: usize, per_blob: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..blobs * per_blob)
        .map(|i| {
            let c = (i / per_blob) as f64 * 2.0;
            (0..dim).map(|_| c + rng.gen_range(-0.15..0.15)).collect()
        })
        .collect()
}

/// A pool of `types` families with `per_type` demos each, typed `t{f}`.
pub fn family_pool(types: usize, per_type: usize, seed: u64) -> DemoPool {
    let mut gen = FamilyGen::new(seed);
    let mut demos = Vec::with_capacity(types * per_type);
    for f in 0..types {
        for q in gen.family(f, per_type) {
            demos.push(Demonstration {
                question: q,
                rationale: "Reason briefly. The answer is 1.".to_owned(),
                answer: "1".to_owned(),
                type_label: format!("t{f}"),
            });
        }
    }
    DemoPool::from_demos(demos).expect("generated questions are distinct")
}

/// `n` questions cycling over the first `types` families.
pub fn family_questions(types: usize, n: usize, seed: u64) -> Vec<String> {
    let mut gen = FamilyGen::new(seed);
    (0..n).map(|i| gen.question(i % types)).collect()
}

/// Router over a 1024-dim hash encoder and a constant scripted LLM.
pub fn offline_router(cfg: RouterConfig) -> Router {
    let embedder = Embedder::new(Arc::new(HashEncoder::new(1024, 0)));
    Router::new(cfg, embedder, Arc::new(ScriptedLlm::new(Vec::new(), "The answer is 1.")))
}

pub fn state(pool: DemoPool) -> RouterState {
    RouterState::new(pool, DataCache::new())
}
