"""Matching quad sides with edge path graphs."""
from __future__ import annotations

import math

import numpy as np

from ..geometry import segment_distances
from ..imaging import PathGraph, PathGraphSet


def _count_near(g: PathGraph, s, radius: float) -> int:
    d = segment_distances(g.centers(), s)
    return int(np.count_nonzero(d < radius))


def assign_path_graph(s, graphs, p) -> PathGraph | None:
    """Path graph with the most pixels closer than ``delta_min_e`` to segment ``s``.

    The winner is returned only if that count exceeds ``rho_min * |s|``;
    ties go to the graph listed first.
    """
    if isinstance(graphs, PathGraphSet):
        return assign_path_graph_set(s, graphs, p)
    best, best_n = None, 0
    length = math.hypot(s[1][0] - s[0][0], s[1][1] - s[0][1])
    for g in graphs:
        n = _count_near(g, s, p.delta_min_e)
        if n > best_n:
            best, best_n = g, n
    if best is None or best_n <= p.rho_min * length:
        return None
    return best


def near_segment_labels(s, gset: PathGraphSet, radius: float) -> np.ndarray:
    """Labels of all chain pixels within ``radius`` of segment ``s`` (one per pixel)."""
    lab = gset.labels
    h, w = lab.shape
    (x0, y0), (x1, y1) = s
    pad = radius + 1.0
    xa = int(max(0, math.floor(min(x0, x1) - pad)))
    xb = int(min(w, math.ceil(max(x0, x1) + pad)))
    ya = int(max(0, math.floor(min(y0, y1) - pad)))
    yb = int(min(h, math.ceil(max(y0, y1) + pad)))
    if xa >= xb or ya >= yb:
        return np.zeros(0, dtype=np.int64)
    win = lab[ya:yb, xa:xb]
    yy, xx = np.nonzero(win >= 0)
    if len(yy) == 0:
        return np.zeros(0, dtype=np.int64)
    pts = np.stack([xx + xa + 0.5, yy + ya + 0.5], axis=1)
    d = segment_distances(pts, s)
    sel = d < radius
    return win[yy[sel], xx[sel]].astype(np.int64)


def assign_path_graph_set(s, gset: PathGraphSet, p) -> PathGraph | None:
    """:func:`assign_path_graph` using the label raster of a :class:`PathGraphSet`."""
    labels = near_segment_labels(s, gset, p.delta_min_e)
    if len(labels) == 0:
        return None
    counts = np.bincount(labels)
    best = int(np.argmax(counts))  # first maximum = lowest graph index
    length = math.hypot(s[1][0] - s[0][0], s[1][1] - s[0][1])
    if counts[best] <= p.rho_min * length:
        return None
    return gset[best]
