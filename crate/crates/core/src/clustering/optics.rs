use rayon::prelude::*;

use super::{check_points, euclidean, ClusterError};

/// Raw OPTICS output. Per-point vectors are indexed like the input.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticsGraph {
    /// Processing order; a permutation of `0..m`.
    pub ordering: Vec<usize>,
    pub reachability: Vec<f64>,
    pub core_distances: Vec<f64>,
    /// Point whose expansion last lowered each point's reachability.
    pub predecessor: Vec<Option<usize>>,
}

/// Distances are rounded to 15 decimals before comparison so that values
/// equal up to floating-point noise tie, and ties resolve by index.
fn round15(x: f64) -> f64 {
    (x * 1e15).round_ties_even() / 1e15
}

/// Computes the OPTICS ordering.
///
/// The core distance of a point is the distance to its `min_samples`-th
/// nearest neighbour, counting the point itself, and is infinite when that
/// exceeds `max_eps` or fewer than `min_samples` points exist. The next point
/// processed is always the unprocessed one with the smallest reachability,
/// lowest index on ties, which makes the result a pure function of the input
/// order.
pub fn optics_run<P: AsRef<[f64]> + Sync>(
    points: &[P],
    min_samples: usize,
    max_eps: Option<f64>,
) -> Result<OpticsGraph, ClusterError> {
    check_points(points)?;
    if min_samples < 2 {
        return Err(ClusterError::BadMinSamples(min_samples));
    }
    let max_eps = max_eps.unwrap_or(f64::INFINITY);
    if max_eps.is_nan() || max_eps < 0.0 {
        return Err(ClusterError::BadParameter(format!("max_eps must be >= 0, got {max_eps}")));
    }
    let m = points.len();

    let dist: Vec<f64> = (0..m * m)
        .into_par_iter()
        .with_min_len(1024)
        .map(|ij| euclidean(points[ij / m].as_ref(), points[ij % m].as_ref()))
        .collect();
    let row = |i: usize| &dist[i * m..(i + 1) * m];

    let core_distances: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            if m < min_samples {
                return f64::INFINITY;
            }
            let mut r = row(i).to_vec();
            let (_, kth, _) = r.select_nth_unstable_by(min_samples - 1, f64::total_cmp);
            if *kth > max_eps {
                f64::INFINITY
            } else {
                round15(*kth)
            }
        })
        .collect();

    let mut reachability = vec![f64::INFINITY; m];
    let mut predecessor = vec![None; m];
    let mut processed = vec![false; m];
    let mut ordering = Vec::with_capacity(m);

    for _ in 0..m {
        let mut point = usize::MAX;
        let mut best = f64::NAN;
        for j in (0..m).filter(|&j| !processed[j]) {
            if point == usize::MAX || reachability[j] < best {
                point = j;
                best = reachability[j];
            }
        }
        processed[point] = true;
        ordering.push(point);

        let core = core_distances[point];
        if core.is_infinite() {
            continue;
        }
        for (j, &d) in row(point).iter().enumerate() {
            if processed[j] || d > max_eps {
                continue;
            }
            let candidate = round15(d.max(core));
            if candidate < reachability[j] {
                reachability[j] = candidate;
                predecessor[j] = Some(point);
            }
        }
    }

    Ok(OpticsGraph {
        ordering,
        reachability,
        core_distances,
        predecessor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_points_have_zero_distances() {
        let pts = vec![vec![0.5, 0.5]; 7];
        let g = optics_run(&pts, 5, None).unwrap();
        assert!(g.core_distances.iter().all(|&c| c == 0.0));
        assert_eq!(g.ordering, (0..7).collect::<Vec<_>>());
        assert!(g.reachability[g.ordering[0]].is_infinite());
        assert!(g.ordering[1..].iter().all(|&p| g.reachability[p] == 0.0));
    }

    #[test]
    fn too_few_points_means_no_core_points() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let g = optics_run(&pts, 5, None).unwrap();
        assert!(g.core_distances.iter().all(|c| c.is_infinite()));
        assert!(g.reachability.iter().all(|r| r.is_infinite()));
        assert_eq!(g.ordering, [0, 1, 2]);
    }

    #[test]
    fn small_line_by_hand() {
        // 0, 1, 3 on a line, min_samples = 2: core distance = nearest other point.
        let pts = vec![vec![0.0], vec![1.0], vec![3.0]];
        let g = optics_run(&pts, 2, None).unwrap();
        assert_eq!(g.core_distances, [1.0, 1.0, 2.0]);
        assert_eq!(g.ordering, [0, 1, 2]);
        assert_eq!(g.reachability[1], 1.0);
        assert_eq!(g.reachability[2], 2.0);
        assert_eq!(g.predecessor, [None, Some(0), Some(1)]);
    }

    #[test]
    fn max_eps_caps_core_distance() {
        let pts = vec![vec![0.0], vec![1.0], vec![3.0]];
        let g = optics_run(&pts, 2, Some(1.5)).unwrap();
        assert!(g.core_distances[2].is_infinite());
        assert!(g.reachability[2].is_infinite());
    }

    #[test]
    fn bad_input_is_rejected() {
        let empty: Vec<Vec<f64>> = vec![];
        assert_eq!(optics_run(&empty, 5, None).unwrap_err(), ClusterError::EmptyInput);
        assert_eq!(
            optics_run(&[vec![0.0]], 1, None).unwrap_err(),
            ClusterError::BadMinSamples(1)
        );
        assert!(matches!(
            optics_run(&[vec![0.0], vec![0.0, 1.0]], 2, None),
            Err(ClusterError::DimensionMismatch { index: 1, .. })
        ));
    }
}
