"""Anchor-graph label propagation for hyperspectral cubes.

Cubes are (bands, height, width) float32 arrays (band-sequential layout);
label rasters are (height, width) uint16 with 0 meaning unlabeled.
"""

import json as _json

try:
    from ._hsilp import (  # installed layout: extension inside the package
        HsilpError,
        add_noise,
        anchor_graph,
        classify as _classify,
        cluster_anchors,
        kmeans_anchors,
        load_cube,
        load_labels,
        make_blob_cube,
        save_cube,
        save_labels,
        score_classification,
    )
except ImportError:  # build-tree layout: extension next to the package on sys.path
    from _hsilp import (
        HsilpError,
        add_noise,
        anchor_graph,
        classify as _classify,
        cluster_anchors,
        kmeans_anchors,
        load_cube,
        load_labels,
        make_blob_cube,
        save_cube,
        save_labels,
        score_classification,
    )

__all__ = [
    "HsilpError",
    "add_noise",
    "anchor_graph",
    "classify",
    "cluster_anchors",
    "kmeans_anchors",
    "load_cube",
    "load_labels",
    "make_blob_cube",
    "save_cube",
    "save_labels",
    "score_classification",
]


def classify(values, truth=None, **kwargs):
    """Run the full pipeline; returns (class map, report dict).

    Keywords mirror the CLI flags: preset, d, theta, sigma2, k, alpha, mode,
    tol, max_iter, labeling, samples_per_class, m, c, beta, h,
    cluster_max_iter, beta_adapt, noise, noise_scale, noise_seed, seed,
    workers, classify_all.
    """
    class_map, report_json = _classify(values, truth, **kwargs)
    return class_map, _json.loads(report_json)
