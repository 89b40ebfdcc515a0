//! Density-based clustering (OPTICS with xi extraction) for discovering new
//! question families, and k-means for picking diverse representatives.
//!
//! All distances are Euclidean. On unit vectors this is monotone in cosine
//! distance, so it agrees with the similarity used for type matching.

mod kmeans;
mod optics;
mod xi;

pub use kmeans::{kmeans_run, sort_by_centroid_distance, KMeansResult, MAX_ITERATIONS};
pub use optics::{optics_run, OpticsGraph};
pub use xi::{extract_dbscan, extract_xi, XiClusters};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("no points to cluster")]
    EmptyInput,
    #[error("min_samples must be at least 2 (got {0})")]
    BadMinSamples(usize),
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("k = {k} is invalid for {n} points")]
    BadK { k: usize, n: usize },
    #[error("{0}")]
    BadParameter(String),
}

/// OPTICS ordering, distances and flat labels for one point set.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticsResult {
    pub ordering: Vec<usize>,
    /// Per point, indexed like the input; `f64::INFINITY` when unreachable.
    pub reachability: Vec<f64>,
    pub core_distance: Vec<f64>,
    /// Per point cluster id; `None` is noise.
    pub labels: Vec<Option<usize>>,
}

impl OpticsResult {
    pub fn cluster_count(&self) -> usize {
        self.labels.iter().flatten().max().map_or(0, |m| m + 1)
    }

    /// Member indices of every cluster, clusters in label order, members ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count()];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(l) = l {
                out[*l].push(i);
            }
        }
        out
    }
}

/// [`optics_run`] followed by [`extract_xi`].
pub fn optics<P: AsRef<[f64]> + Sync>(
    points: &[P],
    min_samples: usize,
    max_eps: Option<f64>,
    xi: f64,
) -> Result<OpticsResult, ClusterError> {
    let graph = optics_run(points, min_samples, max_eps)?;
    let extracted = extract_xi(&graph, xi, min_samples, None)?;
    Ok(OpticsResult {
        ordering: graph.ordering,
        reachability: graph.reachability,
        core_distance: graph.core_distances,
        labels: extracted.labels,
    })
}

/// DBSCAN labels at radius `eps`, computed through OPTICS.
///
/// Graph-only extraction ([`extract_dbscan`]) labels a border point as noise
/// when it was processed before any core point of its cluster. Here every
/// non-core point within `eps` of a core point then joins the cluster of the
/// nearest such core point (lowest index on ties), which is exactly DBSCAN
/// with that border rule. Neighbourhoods count the point itself.
pub fn optics_dbscan<P: AsRef<[f64]> + Sync>(
    points: &[P],
    min_samples: usize,
    eps: f64,
) -> Result<Vec<Option<usize>>, ClusterError> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(ClusterError::BadParameter(format!("eps must be finite and >= 0, got {eps}")));
    }
    let graph = optics_run(points, min_samples, Some(eps))?;
    let mut labels = extract_dbscan(&graph, eps);
    let core: Vec<bool> = graph.core_distances.iter().map(|&c| c <= eps).collect();
    for i in (0..points.len()).filter(|&i| !core[i]) {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..points.len()).filter(|&j| core[j]) {
            let d = euclidean(points[i].as_ref(), points[j].as_ref());
            if d <= eps && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        labels[i] = best.and_then(|(j, _)| labels[j]);
    }
    Ok(labels)
}

pub(crate) fn check_points<P: AsRef<[f64]>>(points: &[P]) -> Result<usize, ClusterError> {
    let first = points.first().ok_or(ClusterError::EmptyInput)?.as_ref().len();
    for (index, p) in points.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != first {
            return Err(ClusterError::DimensionMismatch {
                index,
                expected: first,
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite(index));
        }
    }
    Ok(first)
}

pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}
