mod common;

use common::{close_or_both_inf, load_golden, same_partition, GOLDEN_NAMES};
use cotroute::clustering::{extract_xi, optics, optics_run};

const TOL: f64 = 1e-9;

#[test]
fn graph_matches_reference_runs() {
    for name in GOLDEN_NAMES {
        let g = load_golden(name);
        let ours = optics_run(&g.points, g.min_samples, g.max_eps).unwrap();
        assert_eq!(ours.ordering, g.ordering, "{name}: ordering");
        assert_eq!(ours.predecessor, g.predecessor, "{name}: predecessors");
        for i in 0..g.points.len() {
            assert!(
                close_or_both_inf(ours.reachability[i], g.reachability[i], TOL),
                "{name}: reachability[{i}] {} vs {}",
                ours.reachability[i],
                g.reachability[i]
            );
            assert!(
                close_or_both_inf(ours.core_distances[i], g.core_distances[i], TOL),
                "{name}: core_distance[{i}]"
            );
        }
    }
}

#[test]
fn xi_labels_and_hierarchy_match_reference_runs() {
    for name in GOLDEN_NAMES {
        let g = load_golden(name);
        let graph = optics_run(&g.points, g.min_samples, g.max_eps).unwrap();
        let x = extract_xi(&graph, g.xi, g.min_samples, None).unwrap();
        assert!(same_partition(&x.labels, &g.labels), "{name}: {:?} vs {:?}", x.labels, g.labels);
        assert_eq!(x.hierarchy, g.clusters, "{name}: cluster hierarchy");
    }
}

#[test]
fn two_blob_reference_shape() {
    // The reference labels four leaf clusters and leaves the rest as noise.
    let g = load_golden("two_blob");
    let r = optics(&g.points, g.min_samples, g.max_eps, g.xi).unwrap();
    let mut sizes: Vec<usize> = r.clusters().iter().map(Vec::len).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, [5, 7, 11, 14]);
    assert_eq!(r.labels.iter().filter(|l| l.is_none()).count(), 83);
}

#[test]
fn all_noise_and_coincident_fixtures() {
    let noise = load_golden("all_noise");
    let r = optics(&noise.points, noise.min_samples, noise.max_eps, noise.xi).unwrap();
    assert!(r.labels.iter().all(Option::is_none));

    let same = load_golden("coincident");
    let r = optics(&same.points, same.min_samples, same.max_eps, same.xi).unwrap();
    assert_eq!(r.cluster_count(), 1);
    assert!(r.reachability[r.ordering[0]].is_infinite());
}
