//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use std::collections::VecDeque;

use cotroute::clustering::euclidean;
pub use cotroute::harness::synth::FamilyGen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reference OPTICS run stored as JSON next to the generator script.
pub struct Golden {
    pub name: String,
    pub min_samples: usize,
    pub xi: f64,
    pub max_eps: Option<f64>,
    pub points: Vec<Vec<f64>>,
    pub ordering: Vec<usize>,
    pub reachability: Vec<f64>,
    pub core_distances: Vec<f64>,
    pub predecessor: Vec<Option<usize>>,
    pub labels: Vec<Option<usize>>,
    pub clusters: Vec<(usize, usize)>,
}

pub const GOLDEN_NAMES: [&str; 3] = ["two_blob", "all_noise", "coincident"];

pub fn load_golden(name: &str) -> Golden {
    // Resolves from the core crate and from sibling crates that include this module.
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/optics")
        .join(format!("{name}.json"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let inf_or = |x: &serde_json::Value| x.as_f64().unwrap_or(f64::INFINITY);
    let idx = |x: &serde_json::Value| x.as_i64().filter(|&i| i >= 0).map(|i| i as usize);
    Golden {
        name: name.to_owned(),
        min_samples: v["min_samples"].as_u64().unwrap() as usize,
        xi: v["xi"].as_f64().unwrap(),
        max_eps: v["max_eps"].as_f64(),
        points: v["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p.as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect())
            .collect(),
        ordering: v["ordering"].as_array().unwrap().iter().map(|o| o.as_u64().unwrap() as usize).collect(),
        reachability: v["reachability"].as_array().unwrap().iter().map(inf_or).collect(),
        core_distances: v["core_distances"].as_array().unwrap().iter().map(inf_or).collect(),
        predecessor: v["predecessor"].as_array().unwrap().iter().map(idx).collect(),
        labels: v["labels"].as_array().unwrap().iter().map(idx).collect(),
        clusters: v["clusters"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (c[0].as_u64().unwrap() as usize, c[1].as_u64().unwrap() as usize))
            .collect(),
    }
}

/// True when two labelings induce the same partition with the same noise set.
pub fn same_partition(a: &[Option<usize>], b: &[Option<usize>]) -> bool {
    use std::collections::HashMap;
    if a.len() != b.len() {
        return false;
    }
    let mut fwd = HashMap::new();
    let mut back = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                if *fwd.entry(*x).or_insert(*y) != *y || *back.entry(*y).or_insert(*x) != *x {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

/// Reachability values equal within `tol`, infinities matching exactly.
pub fn close_or_both_inf(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        a == b
    } else {
        (a - b).abs() <= tol
    }
}

/// Hash-encoder dimension used by every family fixture.
pub const FIXTURE_DIM: usize = 1024;

pub fn fixture_embedder() -> cotroute::Embedder {
    cotroute::Embedder::new(std::sync::Arc::new(cotroute::HashEncoder::new(FIXTURE_DIM, 0)))
}

/// Cache records with a short two-step rationale, so every one passes the
/// default filters.
pub fn records(questions: &[String]) -> Vec<cotroute::CachedRecord> {
    questions
        .iter()
        .enumerate()
        .map(|(i, q)| cotroute::CachedRecord {
            question: q.clone(),
            rationale: format!("Work through the case. The answer is {i}."),
            answer: i.to_string(),
        })
        .collect()
}

/// A cache holding `sizes[f]` questions of template `f`, families in order.
pub fn family_cache(seed: u64, sizes: &[usize]) -> (cotroute::DataCache, Vec<usize>) {
    let mut gen = FamilyGen::new(seed);
    let mut questions = Vec::new();
    let mut family_of = Vec::new();
    for (f, &n) in sizes.iter().enumerate() {
        questions.extend(gen.family(f, n));
        family_of.extend(std::iter::repeat_n(f, n));
    }
    (cotroute::DataCache::from_records(records(&questions)).unwrap(), family_of)
}

/// Seed pool: `per_type` demos for each of the first `types` templates,
/// labelled `seed-{f}`.
pub fn seed_pool(seed: u64, types: usize, per_type: usize) -> cotroute::DemoPool {
    let mut gen = FamilyGen::new(seed);
    let demos = (0..types).flat_map(|f| {
        gen.family(f, per_type)
            .into_iter()
            .map(move |q| cotroute::Demonstration {
                question: q,
                rationale: "Think it through. The answer is 1.".to_owned(),
                answer: "1".to_owned(),
                type_label: format!("seed-{f}"),
            })
            .collect::<Vec<_>>()
    });
    cotroute::DemoPool::from_demos(demos).unwrap()
}

/// Gold answer of every question in family `f`.
pub fn family_answer(f: usize) -> String {
    (10 * f + 1).to_string()
}

/// Scripted LLM answering each family with [`family_answer`], keyed on the
/// template of the question being asked.
pub fn family_llm() -> cotroute::harness::ScriptedLlm {
    use cotroute::harness::synth::TEMPLATES;
    use cotroute::harness::{MatchScope, ScriptRule, ScriptedLlm};
    let rules = TEMPLATES
        .iter()
        .enumerate()
        .map(|(f, t)| ScriptRule {
            contains: (*t).to_owned(),
            completion: format!("Check the pattern. The answer is {}.", family_answer(f)),
        })
        .collect();
    ScriptedLlm::new(rules, "Unsure. The answer is 0.").with_scope(MatchScope::LastQuestion)
}

/// `n` stream items of family `f`, with gold type `seed-{f}`.
pub fn family_items(gen: &mut FamilyGen, f: usize, n: usize) -> Vec<cotroute::harness::StreamItem> {
    gen.family(f, n)
        .into_iter()
        .map(|question| cotroute::harness::StreamItem {
            dataset: format!("family-{f}"),
            question,
            format: cotroute::AnswerFormat::numeric(),
            gold_answer: family_answer(f),
            gold_type: Some(format!("seed-{f}")),
        })
        .collect()
}

/// Textbook DBSCAN by exhaustive neighbourhood search. Core points are
/// joined by breadth-first search; a border point takes the cluster of its
/// nearest core neighbour, lowest index on ties.
pub fn brute_dbscan(points: &[Vec<f64>], min_samples: usize, eps: f64) -> Vec<Option<usize>> {
    let m = points.len();
    let near = |i: usize, j: usize| euclidean(&points[i], &points[j]) <= eps;
    let core: Vec<bool> = (0..m).map(|i| (0..m).filter(|&j| near(i, j)).count() >= min_samples).collect();
    let mut labels = vec![None; m];
    let mut next = 0;
    for start in 0..m {
        if !core[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for q in 0..m {
                if core[q] && labels[q].is_none() && near(p, q) {
                    labels[q] = Some(next);
                    queue.push_back(q);
                }
            }
        }
        next += 1;
    }
    for i in (0..m).filter(|&i| !core[i]) {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..m).filter(|&j| core[j]) {
            let d = euclidean(&points[i], &points[j]);
            if d <= eps && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        labels[i] = best.and_then(|(j, _)| labels[j]);
    }
    labels
}

/// A few Gaussian blobs plus uniform background in the unit square.
pub fn dbscan_instance(seed: u64) -> (Vec<Vec<f64>>, usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(20..=100);
    let blobs = rng.gen_range(1..=4);
    let centers: Vec<(f64, f64)> = (0..blobs).map(|_| (rng.gen(), rng.gen())).collect();
    let points = (0..m)
        .map(|i| {
            if i % 5 == 4 {
                vec![rng.gen(), rng.gen()]
            } else {
                let (cx, cy) = centers[i % blobs];
                let r: f64 = rng.gen::<f64>() * 0.08;
                let t: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                vec![cx + r * t.cos(), cy + r * t.sin()]
            }
        })
        .collect();
    (points, rng.gen_range(3..=6), rng.gen_range(0.03..0.12))
}

/// Minimum inertia over every assignment of points to `k` non-empty clusters.
pub fn exhaustive_kmeans(points: &[Vec<f64>], k: usize) -> (Vec<usize>, f64) {
    let n = points.len();
    let mut best = (Vec::new(), f64::INFINITY);
    let total = (k as u64).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let labels: Vec<usize> = (0..n)
            .map(|_| {
                let l = (c % k as u64) as usize;
                c /= k as u64;
                l
            })
            .collect();
        if (0..k).any(|j| !labels.contains(&j)) {
            continue;
        }
        let inertia = partition_inertia(points, &labels, k);
        if inertia < best.1 {
            best = (labels, inertia);
        }
    }
    best
}

pub fn partition_inertia(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let dim = points[0].len();
    (0..k)
        .map(|j| {
            let members: Vec<&Vec<f64>> = points.iter().zip(labels).filter(|(_, &l)| l == j).map(|(p, _)| p).collect();
            let mean: Vec<f64> = (0..dim)
                .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64)
                .collect();
            members.iter().map(|p| euclidean(p, &mean).powi(2)).sum::<f64>()
        })
        .sum()
}
