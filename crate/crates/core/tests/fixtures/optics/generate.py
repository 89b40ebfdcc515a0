"""Regenerates the OPTICS golden files with scikit-learn.

Run from this directory: python3 generate.py
"""
import json

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import cluster_optics_xi, compute_optics_graph


def finite_or_none(values):
    return [None if np.isinf(v) else float(v) for v in values]


def golden(name, points, min_samples, xi, max_eps):
    points = np.asarray(points, dtype=float)
    dist = cdist(points, points)
    ordering, core, reach, pred = compute_optics_graph(
        dist,
        min_samples=min_samples,
        max_eps=np.inf if max_eps is None else max_eps,
        metric="precomputed",
        p=2,
        metric_params=None,
        algorithm="brute",
        leaf_size=30,
        n_jobs=None,
    )
    labels, clusters = cluster_optics_xi(
        reachability=reach,
        predecessor=pred,
        ordering=ordering,
        min_samples=min_samples,
        xi=xi,
    )
    doc = {
        "name": name,
        "min_samples": min_samples,
        "xi": xi,
        "max_eps": max_eps,
        "points": points.tolist(),
        "ordering": ordering.tolist(),
        "reachability": finite_or_none(reach),
        "core_distances": finite_or_none(core),
        "predecessor": pred.tolist(),
        "labels": labels.tolist(),
        "clusters": np.asarray(clusters).reshape(-1, 2).tolist(),
    }
    with open(f"{name}.json", "w") as fh:
        json.dump(doc, fh, indent=1)
    sizes = np.bincount(labels + 1)
    print(name, "noise+cluster sizes:", sizes.tolist())


rng = np.random.default_rng(20240601)
blob_a = rng.normal([0.0, 0.0], 0.05, (60, 2))
blob_b = rng.normal([2.0, 0.0], 0.05, (60, 2))
golden("two_blob", np.vstack([blob_a, blob_b]), 5, 0.05, None)

scatter = rng.uniform(0.0, 1.0, (30, 2))
golden("all_noise", scatter, 5, 0.05, 0.05)

golden("coincident", np.full((8, 2), 0.5), 5, 0.05, None)
