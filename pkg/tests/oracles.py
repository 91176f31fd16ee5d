"""Independent reference implementations the test suite checks against.

These deliberately avoid the library's code paths: pure-python arithmetic
or from-scratch matrix recomputation instead of incremental updates.
"""

import math

import numpy as np
from scipy.spatial.distance import cdist


def fps_oracle(points, k, start=0):
    """Pure-python greedy max-min selection; ties go to the lowest index."""
    pts = [(float(p[0]), float(p[1]), float(p[2])) for p in points]
    selected = [start]
    while len(selected) < k:
        best_idx = -1
        best_d = -1.0
        for i in range(len(pts)):
            if i in selected:
                continue
            dmin = min(
                (pts[i][0] - pts[j][0]) ** 2
                + (pts[i][1] - pts[j][1]) ** 2
                + (pts[i][2] - pts[j][2]) ** 2
                for j in selected
            )
            if dmin > best_d:
                best_d = dmin
                best_idx = i
        selected.append(best_idx)
    return selected


def fps_oracle_full(points, start=0):
    """Brute-force full selection order: recompute every point's distance to
    the selected set from the full pairwise matrix at every step (no
    incremental minimum tracking).
    """
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    d2 = cdist(pts, pts, metric="sqeuclidean")
    order = [start]
    for _ in range(1, n):
        dmin = d2[:, order].min(axis=1)
        dmin[order] = -1.0
        order.append(int(np.argmax(dmin)))
    return order


def predict_oracle(categories, anchor_lists, query):
    """Brute-force nearest anchor: scan every (category, anchor) pair with
    pure-python arithmetic, strict < so the first minimum wins ties.
    """
    nq = math.sqrt(sum(x * x for x in query))
    best = None
    for ci, anchors in enumerate(anchor_lists):
        for vec in anchors:
            dot = sum(float(a) * float(q) for a, q in zip(vec, query))
            na = math.sqrt(sum(float(a) ** 2 for a in vec))
            d = min(max(1.0 - dot / (na * nq), 0.0), 2.0)
            if best is None or d < best[0]:
                best = (d, ci)
    return categories[best[1]]


def metrics_oracle(categories, truth, predicted):
    """Plain counting reference for oacc / per-class recall / macc."""
    n = len(predicted)
    oacc = 100.0 * sum(1 for i in predicted if predicted[i] == truth[i]) / n
    per = {}
    for c in categories:
        ids = [i for i in truth if truth[i] == c]
        if ids:
            per[c] = 100.0 * sum(1 for i in ids if predicted[i] == c) / len(ids)
    macc = sum(per.values()) / len(per)
    return oacc, per, macc
