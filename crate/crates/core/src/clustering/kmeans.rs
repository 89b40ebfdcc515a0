use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_points, squared_euclidean, ClusterError};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Cluster id in `0..k` per point.
    pub labels: Vec<usize>,
    /// Mean of each cluster's points.
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each centroid update.
    pub inertia_history: Vec<f64>,
}

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing (at most [`MAX_ITERATIONS`]). Empty clusters take the point
/// farthest from its centroid. Deterministic for fixed `(points, k, seed)`.
pub fn kmeans_run<P: AsRef<[f64]>>(points: &[P], k: usize, seed: u64) -> Result<KMeansResult, ClusterError> {
    let dim = check_points(points)?;
    let n = points.len();
    if k == 0 || k > n {
        return Err(ClusterError::BadK { k, n });
    }
    let pts: Vec<&[f64]> = points.iter().map(AsRef::as_ref).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_plus_plus(&pts, k, &mut rng);

    let mut labels = assign(&pts, &centroids);
    repair_empty(&pts, &centroids, &mut labels, k);
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        centroids = means(&pts, &labels, &centroids, dim);
        history.push(inertia(&pts, &labels, &centroids));
        let mut next = assign(&pts, &centroids);
        repair_empty(&pts, &centroids, &mut next, k);
        if next == labels {
            break;
        }
        labels = next;
    }
    let centroids = means(&pts, &labels, &centroids, dim);
    let inertia = inertia(&pts, &labels, &centroids);
    Ok(KMeansResult {
        labels,
        centroids,
        inertia,
        iterations,
        inertia_history: history,
    })
}

fn seed_plus_plus(pts: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = pts.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = pts.iter().map(|p| squared_euclidean(p, pts[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 && total.is_finite() {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            // Every point coincides with a centroid already; take the first unused index.
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, p) in pts.iter().enumerate() {
            d2[i] = d2[i].min(squared_euclidean(p, pts[next]));
        }
    }
    chosen.into_iter().map(|i| pts[i].to_vec()).collect()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_euclidean(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign(pts: &[&[f64]], centroids: &[Vec<f64>]) -> Vec<usize> {
    pts.iter().map(|p| nearest(p, centroids).0).collect()
}

fn repair_empty(pts: &[&[f64]], centroids: &[Vec<f64>], labels: &mut [usize], k: usize) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in pts.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = squared_euclidean(p, &centroids[labels[i]]);
            if far.is_none_or(|(_, fd)| d > fd) {
                far = Some((i, d));
            }
        }
        if let Some((i, _)) = far {
            counts[labels[i]] -= 1;
            counts[empty] += 1;
            labels[i] = empty;
        }
    }
}

fn means(pts: &[&[f64]], labels: &[usize], previous: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let k = previous.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in pts.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p.iter()) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .enumerate()
        .map(|(j, (s, c))| {
            if c == 0 {
                previous[j].clone()
            } else {
                s.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect()
}

fn inertia(pts: &[&[f64]], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    pts.iter()
        .zip(labels)
        .map(|(p, &l)| squared_euclidean(p, &centroids[l]))
        .sum()
}

/// Indices of `points` by ascending Euclidean distance to `centroid`; ties
/// keep the lower index first.
pub fn sort_by_centroid_distance<P: AsRef<[f64]>>(points: &[P], centroid: &[f64]) -> Vec<usize> {
    let dists: Vec<f64> = points
        .iter()
        .map(|p| squared_euclidean(p.as_ref(), centroid))
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(a.cmp(&b)));
    order
}
