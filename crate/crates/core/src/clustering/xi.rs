//! Flat cluster extraction from an OPTICS reachability plot.

use super::{ClusterError, OpticsGraph};

/// Xi extraction output.
#[derive(Debug, Clone, PartialEq)]
pub struct XiClusters {
    /// Per point (input indexing); `None` is noise.
    pub labels: Vec<Option<usize>>,
    /// Every cluster found, as inclusive `(start, end)` positions in the
    /// ordering. Nested clusters precede the clusters that contain them.
    pub hierarchy: Vec<(usize, usize)>,
}

struct SteepDownArea {
    start: usize,
    end: usize,
    mib: f64,
}

/// Xi-steepness cluster extraction with predecessor correction.
///
/// A point of the reachability plot is steep downward when it is at least a
/// factor `1/(1-xi)` above its successor and steep upward when it is at most
/// `1-xi` of it. Clusters run from a steep-down area to a matching steep-up
/// area; flat labels are assigned innermost-first, so each labelled cluster
/// is a contiguous run of the ordering and everything outside the innermost
/// clusters is noise. `min_cluster_size` defaults to `min_samples`.
pub fn extract_xi(
    graph: &OpticsGraph,
    xi: f64,
    min_samples: usize,
    min_cluster_size: Option<usize>,
) -> Result<XiClusters, ClusterError> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(ClusterError::BadParameter(format!("xi must lie in (0, 1), got {xi}")));
    }
    if min_samples < 2 {
        return Err(ClusterError::BadMinSamples(min_samples));
    }
    let n = graph.ordering.len();
    let min_cluster_size = min_cluster_size.unwrap_or(min_samples).max(2);
    if n < min_samples || n < min_cluster_size {
        return Ok(XiClusters {
            labels: vec![None; n],
            hierarchy: Vec::new(),
        });
    }

    let mut plot: Vec<f64> = graph.ordering.iter().map(|&p| graph.reachability[p]).collect();
    plot.push(f64::INFINITY);
    let pred_plot: Vec<Option<usize>> = graph.ordering.iter().map(|&p| graph.predecessor[p]).collect();

    let xi_complement = 1.0 - xi;
    // NaN ratios (0/0, inf/inf) compare false everywhere, i.e. flat.
    let ratio: Vec<f64> = (0..n).map(|i| plot[i] / plot[i + 1]).collect();
    let steep_up: Vec<bool> = ratio.iter().map(|&r| r <= xi_complement).collect();
    let steep_down: Vec<bool> = ratio.iter().map(|&r| r >= 1.0 / xi_complement).collect();
    let downward: Vec<bool> = ratio.iter().map(|&r| r > 1.0).collect();
    let upward: Vec<bool> = ratio.iter().map(|&r| r < 1.0).collect();

    let mut sdas: Vec<SteepDownArea> = Vec::new();
    let mut hierarchy = Vec::new();
    let mut index = 0usize;
    let mut mib = 0.0f64;

    for steep_index in (0..n).filter(|&i| steep_up[i] || steep_down[i]) {
        if steep_index < index {
            continue;
        }
        mib = plot[index..=steep_index].iter().fold(mib, |a, &b| a.max(b));

        if steep_down[steep_index] {
            filter_sdas(&mut sdas, mib, xi_complement, &plot);
            let end = extend_region(&steep_down, &upward, steep_index, min_samples);
            sdas.push(SteepDownArea {
                start: steep_index,
                end,
                mib: 0.0,
            });
            index = end + 1;
            mib = plot[index];
            continue;
        }

        filter_sdas(&mut sdas, mib, xi_complement, &plot);
        let u_start = steep_index;
        let u_end = extend_region(&steep_up, &downward, u_start, min_samples);
        index = u_end + 1;
        mib = plot[index];

        let mut found = Vec::new();
        for d in &sdas {
            let mut c_start = d.start;
            let mut c_end = u_end;
            if plot[c_end + 1] * xi_complement < d.mib {
                continue;
            }
            let d_max = plot[d.start];
            if d_max * xi_complement >= plot[c_end + 1] {
                while plot[c_start + 1] > plot[c_end + 1] && c_start < d.end {
                    c_start += 1;
                }
            } else if plot[c_end + 1] * xi_complement >= d_max {
                while plot[c_end - 1] > d_max && c_end > u_start {
                    c_end -= 1;
                }
            }
            let Some((s, e)) = correct_predecessor(&plot, &pred_plot, &graph.ordering, c_start, c_end) else {
                continue;
            };
            if e - s + 1 < min_cluster_size || s > d.end || e < u_start {
                continue;
            }
            found.push((s, e));
        }
        found.reverse();
        hierarchy.extend(found);
    }

    let mut by_position: Vec<Option<usize>> = vec![None; n];
    let mut next_label = 0;
    for &(s, e) in &hierarchy {
        if by_position[s..=e].iter().all(Option::is_none) {
            by_position[s..=e].iter_mut().for_each(|l| *l = Some(next_label));
            next_label += 1;
        }
    }
    let mut labels = vec![None; n];
    for (pos, &p) in graph.ordering.iter().enumerate() {
        labels[p] = by_position[pos];
    }
    Ok(XiClusters { labels, hierarchy })
}

/// Drops steep-down areas that the new maximum-in-between has risen above
/// and raises the survivors' own maxima.
fn filter_sdas(sdas: &mut Vec<SteepDownArea>, mib: f64, xi_complement: f64, plot: &[f64]) {
    if mib.is_infinite() {
        sdas.clear();
        return;
    }
    sdas.retain(|d| mib <= plot[d.start] * xi_complement);
    for d in sdas.iter_mut() {
        d.mib = d.mib.max(mib);
    }
}

/// Grows a steep area from `start` while it stays steep, tolerating at most
/// `min_samples` consecutive non-steep points that do not turn against the
/// slope. Returns the last steep position.
fn extend_region(steep: &[bool], against: &[bool], start: usize, min_samples: usize) -> usize {
    let mut non_steep = 0;
    let mut end = start;
    for index in start..steep.len() {
        if steep[index] {
            non_steep = 0;
            end = index;
        } else if !against[index] {
            non_steep += 1;
            if non_steep > min_samples {
                break;
            }
        } else {
            return end;
        }
    }
    end
}

/// Shrinks a candidate cluster from the right until its last point was
/// reached from inside the cluster (or the left edge is higher than the
/// right edge).
fn correct_predecessor(
    plot: &[f64],
    pred_plot: &[Option<usize>],
    ordering: &[usize],
    s: usize,
    mut e: usize,
) -> Option<(usize, usize)> {
    while s < e {
        if plot[s] > plot[e] {
            return Some((s, e));
        }
        if let Some(p) = pred_plot[e] {
            if ordering[s..e].contains(&p) {
                return Some((s, e));
            }
        }
        e -= 1;
    }
    None
}

/// DBSCAN-equivalent labels at radius `eps` (meaningful for `eps` up to the
/// `max_eps` the graph was computed with). A new cluster starts at every
/// core point whose reachability exceeds `eps`; non-core points beyond `eps`
/// are noise.
pub fn extract_dbscan(graph: &OpticsGraph, eps: f64) -> Vec<Option<usize>> {
    let n = graph.ordering.len();
    let mut labels = vec![None; n];
    let mut current: Option<usize> = None;
    let mut count = 0;
    for &p in &graph.ordering {
        let far = graph.reachability[p] > eps;
        let core = graph.core_distances[p] <= eps;
        if far {
            if core {
                current = Some(count);
                count += 1;
                labels[p] = current;
            } else {
                labels[p] = None;
            }
        } else {
            labels[p] = current;
        }
    }
    labels
}
