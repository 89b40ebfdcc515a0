mod common;

use common::{brute_dbscan, dbscan_instance, same_partition};
use cotroute::clustering::{extract_dbscan, optics_dbscan, optics_run};

#[test]
fn optics_at_eps_equals_brute_force_dbscan() {
    for seed in 0..20 {
        let (points, min_samples, eps) = dbscan_instance(seed);
        let ours = optics_dbscan(&points, min_samples, eps).unwrap();
        let oracle = brute_dbscan(&points, min_samples, eps);
        assert!(same_partition(&ours, &oracle), "seed {seed}: {ours:?}\nvs\n{oracle:?}");
    }
}

#[test]
fn graph_extraction_agrees_on_core_points() {
    for seed in 0..20 {
        let (points, min_samples, eps) = dbscan_instance(seed);
        let graph = optics_run(&points, min_samples, Some(eps)).unwrap();
        let labels = extract_dbscan(&graph, eps);
        let oracle = brute_dbscan(&points, min_samples, eps);
        let core: Vec<usize> = (0..points.len()).filter(|&i| graph.core_distances[i] <= eps).collect();
        let ours_core: Vec<_> = core.iter().map(|&i| labels[i]).collect();
        let oracle_core: Vec<_> = core.iter().map(|&i| oracle[i]).collect();
        assert!(ours_core.iter().all(Option::is_some));
        assert!(same_partition(&ours_core, &oracle_core), "seed {seed}");
        // Graph-only extraction can only lose border points, never invent members.
        for i in 0..points.len() {
            if oracle[i].is_none() {
                assert_eq!(labels[i], None, "seed {seed}, point {i}");
            }
        }
    }
}
