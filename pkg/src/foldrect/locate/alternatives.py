"""Hexangle hypotheses from a pair of page-half quads."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import GeometryError, Hexangle, Line2, intersect
from ..imaging import PathGraphSet
from .crease import (CreaseCandidate, detect_crease_line_global, detect_crease_line_local, detect_crease_point,
                     fracture_table)
from .paths import assign_path_graph_set
from .quads import ScoredQuad

KINDS = ("h1", "h2", "h3", "h4")


@dataclass
class HexAlternative:
    hex: Hexangle
    kind: str
    source: tuple[ScoredQuad, ScoredQuad]


@dataclass
class LocateContext:
    """Per-image data shared by all quad pairs.

    ``lh`` is the pool of horizontal lines used for crease lines (both
    halves), ``h_graphs``/``v_graphs`` the path graphs of the raw edge maps.
    Fracture tables are computed once per chain and searches memoized per
    row interval.
    """

    width: int
    height: int
    lh: list
    h_graphs: PathGraphSet
    v_graphs: PathGraphSet
    params: object
    _crease_cache: dict = field(default_factory=dict, repr=False)
    _global_cache: dict = field(default_factory=dict, repr=False)
    _hits_cache: dict = field(default_factory=dict, repr=False)
    _tables: dict = field(default_factory=dict, repr=False)

    def crease_point(self, g, y_lo: float, y_hi: float) -> CreaseCandidate | None:
        key = (g.index, int(np.floor(y_lo)), int(np.ceil(y_hi)))
        if key not in self._crease_cache:
            table = self._tables.get(g.index)
            if table is None and len(g) >= 8:
                table = self._tables[g.index] = fracture_table(g, self.params)
            self._crease_cache[key] = detect_crease_point(g, self.params, (key[1], key[2]), table)
        return self._crease_cache[key]


def side_graphs(q: ScoredQuad, ctx: LocateContext):
    """Path graphs assigned to the left and right sides of a quad (memoized on ``q``)."""
    if getattr(q, "_sides_done", False):
        return q.side_graphs
    v = q.vertices
    left = assign_path_graph_set((v[0], v[3]), ctx.v_graphs, ctx.params)
    right = assign_path_graph_set((v[1], v[2]), ctx.v_graphs, ctx.params)
    q.side_graphs = [left, right]
    q._sides_done = True
    return q.side_graphs


def _midpoint_vertex(crease: Line2, up_side, lo_side):
    """Midpoint of the crease line's intersections with an upper and a lower side line."""
    try:
        a = intersect(crease, Line2.through(*up_side)).to_point()
        b = intersect(crease, Line2.through(*lo_side)).to_point()
    except GeometryError:
        return None
    return np.array([(a.x + b.x) / 2.0, (a.y + b.y) / 2.0])


def _make(outer, cl, cr, kind, pair, out):
    if cl is None or cr is None:
        return
    v = np.array([outer[0], outer[1], cr, outer[2], outer[3], cl], dtype=float)
    if not np.all(np.isfinite(v)):
        return
    try:
        h = Hexangle(v, Line2.through(v[5], v[2]))
    except GeometryError:
        return
    out.append(HexAlternative(h, kind, pair))


def form_alternatives(qt: ScoredQuad, qb: ScoredQuad, ctx: LocateContext) -> list[HexAlternative]:
    """Up to four hexangles for a (top quad, bottom quad) pair.

    Requires a side chain shared by both quads on the left or right.  The
    outer corners come from the quads: top corners of ``qt``, bottom corners
    of ``qb``.  Crease vertices:

    * h1: detected fractures on both sides;
    * h2: left fracture, right vertex from the crease line near it
      (midpoint of its intersections with the right sides of both quads);
    * h3: mirror of h2;
    * h4: global crease line with the vertex found on it, the other vertex by
      the midpoint rule (omitted when the global line yields no vertex).
    """
    p = ctx.params
    lt, rt = side_graphs(qt, ctx)
    lb, rb = side_graphs(qb, ctx)
    common_l = lt if lt is not None and lb is not None and lt.index == lb.index else None
    common_r = rt if rt is not None and rb is not None and rt.index == rb.index else None
    if common_l is None and common_r is None:
        return []
    vt, vb = qt.vertices, qb.vertices
    outer = (vt[0], vt[1], vb[2], vb[3])  # TL, TR, BR, BL
    up_l, lo_l = (vt[0], vt[3]), (vb[0], vb[3])
    up_r, lo_r = (vt[1], vt[2]), (vb[1], vb[2])
    pair = (qt, qb)
    margin = p.delta_min_b
    cp_l = cp_r = None
    if common_l is not None:
        cp_l = ctx.crease_point(common_l, vt[0][1] + margin, vb[3][1] - margin)
    if common_r is not None:
        cp_r = ctx.crease_point(common_r, vt[1][1] + margin, vb[2][1] - margin)
    out: list[HexAlternative] = []
    if cp_l is not None and cp_r is not None:
        _make(outer, np.array(cp_l.vertex), np.array(cp_r.vertex), "h1", pair, out)
    if cp_l is not None:
        ln = detect_crease_line_local(cp_l.vertex, ctx.lh, p)
        if ln is not None:
            _make(outer, np.array(cp_l.vertex), _midpoint_vertex(ln.line, up_r, lo_r), "h2", pair, out)
    if cp_r is not None:
        ln = detect_crease_line_local(cp_r.vertex, ctx.lh, p)
        if ln is not None:
            _make(outer, _midpoint_vertex(ln.line, up_l, lo_l), np.array(cp_r.vertex), "h3", pair, out)
    commons = [g for g in (common_l, common_r) if g is not None]
    key = (tuple(np.round(vt[:2].ravel(), 6)), tuple(np.round(vb[2:].ravel(), 6)),
           tuple(g.index for g in commons))
    if key not in ctx._global_cache:
        ctx._global_cache[key] = detect_crease_line_global(vt, vb, ctx.lh, ctx.h_graphs, commons, p, ctx.width,
                                                             ctx._hits_cache)
    glob = ctx._global_cache[key]
    if glob is not None and glob[1] is not None:
        ln, vert = glob
        x = np.array(vert)
        on_left = common_l is not None and (common_r is None or abs(x[0] - vt[3][0]) <= abs(x[0] - vt[2][0]))
        if on_left:
            _make(outer, x, _midpoint_vertex(ln.line, up_r, lo_r), "h4", pair, out)
        else:
            _make(outer, _midpoint_vertex(ln.line, up_l, lo_l), x, "h4", pair, out)
    return out
