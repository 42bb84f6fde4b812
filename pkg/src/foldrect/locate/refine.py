"""Sub-pixel refinement of a hexangle's lines from nearby edge points.

Hough lines are quantized to dyadic patterns, which leaves their position
off by up to a pixel or two.  Before the continuity correction each of the
seven hexangle segments is replaced by the total-least-squares line through
the sub-pixel edge points lying close to it, provided there are enough of
them; the vertices are then re-intersected.
"""
from __future__ import annotations

import numpy as np

from ..geometry import BL, BR, CL, CR, TL, TR, GeometryError, Hexangle, Line2, intersect_points
from ..imaging import EdgeMap


def edge_points(em: EdgeMap) -> np.ndarray:
    """Sub-pixel positions (N, 2) of all non-zero pixels of an edge map."""
    ys, xs = np.nonzero(em.data > 0)
    pts = np.stack([xs + 0.5, ys + 0.5], axis=1).astype(np.float64)
    if em.offset is not None:
        pts[:, 0 if em.orientation == "vertical" else 1] += em.offset[ys, xs]
    return pts


def edge_polarity(gray: np.ndarray, em: EdgeMap) -> np.ndarray:
    """Sign (+1/-1/0) of the intensity change across each non-zero pixel of ``em``.

    Measured as the central difference along +y for horizontal maps and
    along +x for vertical ones, in the same order as :func:`edge_points`.
    """
    g = np.asarray(gray, dtype=np.float32)
    ys, xs = np.nonzero(em.data > 0)
    if em.orientation == "horizontal":
        a = g[np.clip(ys + 1, 0, g.shape[0] - 1), xs] - g[np.clip(ys - 1, 0, g.shape[0] - 1), xs]
    else:
        a = g[ys, np.clip(xs + 1, 0, g.shape[1] - 1)] - g[ys, np.clip(xs - 1, 0, g.shape[1] - 1)]
    return np.sign(a).astype(np.int8)


def fit_line_tls(pts: np.ndarray) -> Line2:
    """Total-least-squares line through at least two points."""
    if len(pts) < 2:
        raise GeometryError("need two points for a line")
    c = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - c, full_matrices=False)
    n = vt[-1]
    return Line2(float(n[0]), float(n[1]), float(-n @ c))


def refine_segment(pts: np.ndarray, p0, p1, radius: float, min_support: float, trim: float = 0.1) -> Line2 | None:
    """Line refitted to the edge points within ``radius`` of segment p0-p1.

    Points within ``trim`` of either end (as a fraction of the length) are
    ignored so that the neighbouring sides do not pull the fit.  The band is
    re-centred on the fitted line and the fit repeated a few times, then a
    last fit uses the points within half the radius.  Returns None when
    fewer than ``min_support`` points per unit of (trimmed) length are found.
    """
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    length = float(np.hypot(*d))
    if length < 4:
        return None
    u = d / length
    t = (pts - p0) @ u
    cand = pts[(t > trim * length) & (t < (1 - trim) * length)]
    need = max(min_support * (1 - 2 * trim) * length, 2)
    line = Line2.through(p0, p0 + d)
    for band in (radius, radius, radius, 0.5 * radius):
        r = np.abs(cand @ np.array([line.a, line.b]) + line.c)
        sel = cand[r <= band]
        if len(sel) < need:
            return None
        line = fit_line_tls(sel)
    return line


def _flank_pair(upper: np.ndarray, lower: np.ndarray, max_half: float) -> tuple[float, float]:
    """(centre, half-width) of the best pair of parallel one-pixel bands.

    A band at ``centre - half`` over the offsets ``upper`` and one at
    ``centre + half`` over ``lower`` are placed on a 0.1 px grid so that the
    smaller of their populations is largest; ties go to the narrower pair.
    """
    su, sl = np.sort(upper), np.sort(lower)

    def count(s, x):
        return np.searchsorted(s, x + 0.5, side="right") - np.searchsorted(s, x - 0.5, side="left")

    cs = np.round(np.arange(-max_half, max_half + 1e-9, 0.1), 10)
    hs = np.round(np.arange(0.5, max_half + 1e-9, 0.1), 10)
    C, Hw = np.meshgrid(cs, hs, indexing="ij")
    m = np.minimum(count(su, C - Hw), count(sl, C + Hw))
    # first maximum in (half-width, centre) order, i.e. the narrowest pair
    idx = np.argwhere((m == m.max()).T)[0]
    return float(cs[idx[1]]), float(hs[idx[0]])


def refine_strip(pts: np.ndarray, p0, p1, radius: float, min_support: float, polarity: np.ndarray | None = None,
                 trim: float = 0.1) -> Line2 | None:
    """Centre line of a dark strip (two parallel edges) near segment p0-p1.

    The edge points within ``2 * radius`` of the segment are searched for
    the best-populated pair of parallel one-pixel bands, the two flanks of
    the strip.  With ``polarity`` (sign of the intensity change along +y, as
    from :func:`edge_polarity`) only darkening edges may form the upper flank
    and only brightening ones the lower, which keeps nearby text from
    posing as a flank.  A line is fitted to each flank and their mean is the
    centre line; the search is repeated once around it.  Returns None unless
    each flank has ``min_support / 2`` points per unit of (trimmed) length.
    """
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    length = float(np.hypot(*d))
    if length < 4:
        return None
    u = d / length
    t = (pts - p0) @ u
    inner = (t > trim * length) & (t < (1 - trim) * length)
    cand = pts[inner]
    pol = np.zeros(len(cand), dtype=np.int8) if polarity is None else polarity[inner]
    need = max(0.5 * min_support * (1 - 2 * trim) * length, 2)
    line = Line2.through(p0, p0 + d)
    if line.b < 0:
        line = Line2(-line.a, -line.b, -line.c)   # normal points down the image
    for _ in range(2):
        nrm = np.array([line.a, line.b])
        off = cand @ nrm + line.c
        near = np.abs(off) <= 2 * radius
        q, o, pq = cand[near], off[near], pol[near]
        up_ok = pq <= 0 if polarity is not None else np.ones(len(q), bool)
        lo_ok = pq >= 0 if polarity is not None else np.ones(len(q), bool)
        if min(up_ok.sum(), lo_ok.sum()) < need:
            return None
        c, hw = _flank_pair(o[up_ok], o[lo_ok], radius)
        flanks = []
        for ctr, ok in ((c - hw, up_ok), (c + hw, lo_ok)):
            f = q[ok & (np.abs(o - ctr) <= 0.5)]
            if len(f) < need:
                return None
            ln = fit_line_tls(f)
            if ln.a * nrm[0] + ln.b * nrm[1] < 0:
                ln = Line2(-ln.a, -ln.b, -ln.c)
            flanks.append(ln)
        a, b = flanks
        line = Line2(0.5 * (a.a + b.a), 0.5 * (a.b + b.b), 0.5 * (a.c + b.c))
    return line


def _meet(lines) -> np.ndarray:
    """Least-squares meeting point of normalized lines."""
    a = np.array([[ln.a, ln.b] for ln in lines])
    c = np.array([-ln.c for ln in lines])
    sol, *_ = np.linalg.lstsq(a, c, rcond=None)
    return sol


def refine_hexangle(h: Hexangle, eh: EdgeMap, ev: EdgeMap, radius: float = 2.0, min_support: float = 0.5,
                    points: tuple[np.ndarray, np.ndarray] | None = None, gray: np.ndarray | None = None,
                    polarity: np.ndarray | None = None) -> Hexangle:
    """Hexangle whose lines are refitted to nearby edge points.

    Segments without enough support keep their current line.  Outer corners
    are re-intersected from their two sides; each crease vertex is the
    least-squares meeting point of the crease line and its two sides, so it
    stays on the (refitted) crease line after projection.  The crease is
    taken as the middle of its shadow strip when both flanks are found
    (using edge polarity from ``gray`` or precomputed ``polarity`` of the
    horizontal edges when given), else it is refitted like a side.
    """
    ph, pv = points if points is not None else (edge_points(eh), edge_points(ev))
    if polarity is None and gray is not None:
        polarity = edge_polarity(gray, eh)
    v = h.vertices

    def fit(i, j, pts):
        ln = refine_segment(pts, v[i], v[j], radius, min_support)
        return ln if ln is not None else Line2.through(v[i], v[j])

    try:
        top, bottom = fit(TL, TR, ph), fit(BL, BR, ph)
        # a crease shows up as a dark strip whose two flanks are both edges
        crease = (refine_strip(ph, v[CL], v[CR], radius, min_support, polarity)
                  or refine_segment(ph, v[CL], v[CR], radius, min_support) or h.crease_line)
        lu, ru = fit(TL, CL, pv), fit(TR, CR, pv)
        ll, rl = fit(CL, BL, pv), fit(CR, BR, pv)
        out = np.empty((6, 2))
        out[TL] = intersect_points(top, lu)
        out[TR] = intersect_points(top, ru)
        out[BL] = intersect_points(bottom, ll)
        out[BR] = intersect_points(bottom, rl)
        out[CL] = crease.project(_meet((crease, lu, ll)))
        out[CR] = crease.project(_meet((crease, ru, rl)))
        return Hexangle(out, crease)
    except GeometryError:
        return h
