"""Crease detection: boundary fractures on side chains and the crease line."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._kernels import best_fracture, crease_table
from ..geometry import Line2, Point2, points_in_convex
from ..hough import LineH, brightest_near
from ..imaging import PathGraph

MIN_CHAIN = 8


@dataclass(frozen=True)
class CreaseCandidate:
    """Best fracture of a side chain.

    ``polyline`` is (A*, B, C*, D*): A*B is the straight run before the
    fracture, C*D* the one after it, ``vertex`` the meeting point of the two
    runs' lines and ``angle`` the angle between them at the vertex (180 for a
    straight chain).
    """

    vertex: Point2
    angle: float
    polyline: tuple[Point2, Point2, Point2, Point2]
    indices: tuple[int, int, int, int] = (-1, -1, -1, -1)


def chain_points(g: PathGraph) -> tuple[np.ndarray, np.ndarray]:
    c = g.subpixel()
    return np.ascontiguousarray(c[:, 0]), np.ascontiguousarray(c[:, 1])


def fracture_table(g: PathGraph, p) -> np.ndarray:
    """Per-start fracture candidates of a chain (see ``_kernels.crease_table``)."""
    px, py = chain_points(g)
    normalized = getattr(p, "crease_distance", "normalized") == "normalized"
    return crease_table(px, py, float(p.eps_c), float(p.eps_o), normalized)


def detect_crease_point(g: PathGraph, p, rows: tuple[float, float] | None = None,
                        table: np.ndarray | None = None) -> CreaseCandidate | None:
    """Strongest bend of a vertical path graph, if sharper than ``phi_max_c``.

    For every chain point B the shortest run B..C-bar whose interior points
    deviate from the chord B C-bar by a squared error of at least ``eps_c`` is
    found and C* is the point before C-bar.  A* is the earliest point before
    B such that points between A* and B stay within a squared error of
    ``eps_o`` of the chord A* B, and D* the latest point after C* with the
    same property for C* D*.  The candidate is the B with the sharpest angle
    between lines A*B and C*D*.

    ``rows`` restricts B to chain points whose row centre lies in the given
    closed interval.  ``p.crease_distance`` selects the point-to-chord
    distance: "normalized" (Euclidean) or "algebraic" (the chord's implicit
    equation with coefficients from the raw endpoint difference).  ``table``
    may hold the chain's precomputed :func:`fracture_table`.
    """
    n = len(g)
    if n < MIN_CHAIN:
        return None
    px, py = chain_points(g)
    if rows is None:
        b_lo, b_hi = 0, n - 1
    else:
        b_lo = int(np.searchsorted(py, rows[0], side="left"))
        b_hi = int(np.searchsorted(py, rows[1], side="right")) - 1
        if b_hi < b_lo:
            return None
    if table is None:
        table = fracture_table(g, p)
    ib = best_fracture(table, b_lo, b_hi)
    if ib < 0:
        return None
    ang, vx, vy = table[ib, 0], table[ib, 1], table[ib, 2]
    ia, ic, idd = int(table[ib, 3]), int(table[ib, 4]), int(table[ib, 5])
    if not ang < p.phi_max_c:
        return None
    poly = tuple(Point2(float(px[i]), float(py[i])) for i in (ia, ib, ic, idd))
    return CreaseCandidate(Point2(float(vx), float(vy)), float(ang), poly, (ia, int(ib), ic, idd))


def detect_crease_line_local(cp, lh, p) -> LineH | None:
    """Brightest horizontal line passing within ``delta_max_c`` of a crease point."""
    return brightest_near(lh, cp, p.delta_max_c)


def _line_y(l: Line2, x: float) -> float:
    if abs(l.b) < 1e-12:
        return math.nan
    return -(l.a * x + l.c) / l.b


def _graphs_of(e):
    if e is None:
        return []
    if isinstance(e, PathGraph):
        return [e]
    return [g for g in e if g is not None]


def _gid(g) -> int:
    # graphs built outside a PathGraphSet carry index -1
    return g.index if g.index >= 0 else -id(g) - 1


def _side_pixels(common, cache: dict) -> set:
    key = ("side", tuple(_gid(g) for g in common))
    pix = cache.get(key)
    if pix is None:
        pix = set()
        for g in common:
            pix.update(zip(g.xs.tolist(), g.ys.tolist()))
        cache[key] = pix
    return pix


def _near_chains(line: Line2, h_graphs, width: float, p, cache: dict) -> list:
    """Long horizontal chains with more than ``rho_min`` of their pixels near ``line``."""
    key = ("near", line.a, line.b, line.c)
    near = cache.get(key)
    if near is None:
        min_len = p.rho_min_l1 * width
        if hasattr(h_graphs, "longer_than"):
            cands = [h_graphs[i] for i in h_graphs.longer_than(int(math.ceil(min_len)))]
        else:
            cands = [g for g in h_graphs if len(g) >= min_len]
        near = []
        for g in cands:
            c = g.centers()
            d = np.abs(c @ np.array([line.a, line.b]) + line.c)
            if np.count_nonzero(d < p.delta_min_e) > p.rho_min * len(g):
                near.append((g, c))
        cache[key] = near
    return near


def _inside(quad: np.ndarray, g, c: np.ndarray, cache: dict) -> np.ndarray:
    key = ("in", _gid(g), quad.tobytes())
    m = cache.get(key)
    if m is None:
        m = cache[key] = points_in_convex(quad, c, 1e-9)
    return m


def _chain_hits(g, side_pix: set, beta: int) -> list[Point2]:
    xs = g.xs.tolist()
    ys = g.ys.tolist()
    ext = [(xs[0] - k, ys[0]) for k in range(beta, 0, -1)] + list(zip(xs, ys)) + \
          [(xs[-1] + k, ys[-1]) for k in range(1, beta + 1)]
    hits = []
    for k, (x, y) in enumerate(ext):
        if (x, y) in side_pix:
            hits.append(Point2(x + 0.5, y + 0.5))
        elif k + 1 < len(ext):
            # 8-connected chains may cross diagonally inside a 2x2 block
            # without sharing a pixel
            x2, y2 = ext[k + 1]
            if x2 == x + 1 and abs(y2 - y) == 1 and (x2, y) in side_pix and (x, y2) in side_pix:
                hits.append(Point2(x + 1.0, 0.5 * (y + y2) + 0.5))
    return hits


def crease_graph_hits(line: Line2, qt, qb, h_graphs, e_common, width: float, p, cache: dict | None = None) -> list[Point2]:
    """Intersections of the crease line's horizontal chains with the side chains.

    A horizontal chain belongs to the crease line if more than ``rho_min`` of
    its pixels lie within ``delta_min_e`` of the line, it spans at least
    ``rho_min_l1`` of the image width and at least ``rho_min_l2`` of its
    pixels fall inside the two quads.  Such a chain is extended by ``beta``
    pixels at each end and every pixel shared with a side chain is reported
    (ordered left to right), as is every diagonal crossing of the two chains
    inside a 2x2 pixel block.

    ``cache`` (a dict reused across calls on the same image) memoizes the
    parts that do not depend on the quads.
    """
    common = _graphs_of(e_common)
    if not common:
        return []
    cache = {} if cache is None else cache
    side_pix = _side_pixels(common, cache)
    qa = np.asarray(qt.vertices if hasattr(qt, "vertices") else qt, dtype=float)
    qb_ = np.asarray(qb.vertices if hasattr(qb, "vertices") else qb, dtype=float)
    hits: list[Point2] = []
    beta = int(p.beta)
    ckey = tuple(_gid(g) for g in common)
    for g, c in _near_chains(line, h_graphs, width, p, cache):
        inside = _inside(qa, g, c, cache) | _inside(qb_, g, c, cache)
        if np.count_nonzero(inside) < p.rho_min_l2 * len(g):
            continue
        hkey = ("hits", _gid(g), ckey)
        if hkey not in cache:
            cache[hkey] = _chain_hits(g, side_pix, beta)
        hits.extend(cache[hkey])
    hits.sort(key=lambda q: (q.x, q.y))
    return hits


def detect_crease_line_global(qt, qb, lh, h_graphs, e_common, p, width: float | None = None,
                               cache: dict | None = None):
    """Crease line between the top side of ``qt`` and the bottom side of ``qb``.

    Candidate lines must cross both image borders (x = 0 and x = width)
    at least ``delta_min_b`` below the top line and above the bottom line of
    the two quads; the brightest such line is taken.  Returns
    ``(line, vertex)`` where ``vertex`` is the leftmost intersection of the
    line's crease chains with the side chain(s) ``e_common``, or None if no
    chain qualifies; returns None if no line qualifies.  ``cache`` is passed
    on to :func:`crease_graph_hits`.
    """
    va = np.asarray(qt.vertices if hasattr(qt, "vertices") else qt, dtype=float)
    vb = np.asarray(qb.vertices if hasattr(qb, "vertices") else qb, dtype=float)
    if width is None:
        width = float(max(va[:, 0].max(), vb[:, 0].max()))
    top = Line2.through(va[0], va[1])
    bot = Line2.through(vb[3], vb[2])
    xs = (0.0, float(width))
    ykey = ("pool_y", id(lh), xs[1])
    ys = cache.get(ykey) if cache is not None else None
    if ys is None:
        ys = np.array([[_line_y(ln.line, x) for x in xs] for ln in lh], dtype=float).reshape(len(lh), 2)
        if cache is not None:
            cache[ykey] = ys
    lo = np.array([_line_y(top, x) for x in xs]) + p.delta_min_b
    hi = np.array([_line_y(bot, x) for x in xs]) - p.delta_min_b
    ok = np.all((ys >= lo) & (ys <= hi), axis=1)
    sel = [ln for ln, k in zip(lh, ok) if k]
    if not sel:
        return None
    best = max(sel, key=lambda ln: ln.brightness)  # first of equal brightness
    hits = crease_graph_hits(best.line, va, vb, h_graphs, e_common, width, p, cache)
    return best, (hits[0] if hits else None)
