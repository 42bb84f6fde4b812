"""End-to-end unfolding: localization at working resolution, warp at full resolution."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .geometry import Hexangle, Line2
from .hough import fht, top_lines
from .imaging import (EdgeMap, ImageError, PathGraphSet, check_image, extract_edges, smooth, to_grayscale,
                      to_working)
from .locate import LocateContext, SelectionLog, enumerate_quads, form_alternatives, select_hexangle
from .locate.refine import edge_points, edge_polarity, refine_hexangle
from .locate.scoring import LineProfiles
from .params import DEFAULT_PARAMS, Params
from .warp import RectificationError, rectify

log = logging.getLogger(__name__)

MIN_INPUT = 64


@dataclass
class UnfoldResult:
    """Outcome of one run.

    ``status`` is "rectified" (``output`` is the out_w x out_h canvas and
    ``hexangle`` is set, in full-resolution coordinates) or "trivial"
    (``output`` is the input image itself, ``hexangle`` is None).
    """

    status: str
    output: np.ndarray
    hexangle: Hexangle | None = None
    timings: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    homographies: tuple | None = None

    @property
    def rectified(self) -> bool:
        return self.status == "rectified"


@dataclass
class Localization:
    """Intermediate products at working resolution (kept for debugging)."""

    scale: tuple[float, float]
    gray: np.ndarray
    edges: tuple[EdgeMap, EdgeMap]
    smoothed: tuple[EdgeMap, EdgeMap]
    lines: dict
    quads: dict
    alternatives: list
    selection: SelectionLog
    hexangle: Hexangle | None
    notes: list


def _hough_input(em: EdgeMap, graphs: PathGraphSet, p: Params) -> np.ndarray:
    """Edge raster fed to the Hough transform.

    Path graphs shorter than ``min_chain`` pixels (glyph strokes, texture)
    are dropped, the rest is taken as 0/1 pixels or raw responses, and thin
    edges are spread by ``hough_spread`` pixels across their direction so
    that the dyadic patterns, which deviate from the ideal line by up to
    about one and a half pixels, still collect a sloped one-pixel chain.
    """
    keep_ids = graphs.longer_than(int(p.min_chain))
    lut = np.zeros(graphs.count + 1, dtype=bool)
    lut[keep_ids + 1] = True
    keep = lut[graphs.labels + 1]
    if p.hough_input == "binary":
        a = keep.astype(np.uint8)
    else:
        a = np.where(keep, em.data, 0).astype(em.data.dtype)
    r = int(p.hough_spread)
    if r > 0:
        k = (2 * r + 1, 1) if em.orientation == "vertical" else (1, 2 * r + 1)  # (width, height)
        a = cv2.dilate(a, cv2.getStructuringElement(cv2.MORPH_RECT, k))
    return a


def _half_lines(eh: np.ndarray, ev: np.ndarray, r0: int, r1: int, p: Params):
    org = (0.0, float(r0))
    bh = eh[r0:r1]
    bv = ev[r0:r1]
    lh = top_lines(fht(bh, "horizontal", org), p.k_lines, p.nms_radius)
    lv = top_lines(fht(bv, "vertical", org), p.k_lines, p.nms_radius)
    return lh, lv


def localize(img: np.ndarray, p: Params = DEFAULT_PARAMS) -> Localization:
    """Find the folded-page hexangle at working resolution (None if rejected)."""
    small, scale = to_working(img, p.w_work)
    gray = to_grayscale(small)
    notes: list[str] = []
    eh, ev = extract_edges(gray)
    sm_h, sm_v = smooth(eh, p.sigma), smooth(ev, p.sigma)
    hgt, wid = gray.shape
    mid = hgt // 2
    ls = Line2(0.0, 1.0, -hgt / 2.0)
    lines = {}
    quads = {}
    gh, gv = PathGraphSet(eh), PathGraphSet(ev)
    hin, vin = _hough_input(eh, gh, p), _hough_input(ev, gv, p)
    for half, (r0, r1) in (("top", (0, mid)), ("bottom", (mid, hgt))):
        lh, lv = _half_lines(hin, vin, r0, r1, p)
        lines[half] = (lh, lv)
        prof = (LineProfiles(lh, sm_h, wid, hgt), LineProfiles(lv, sm_v, wid, hgt))
        qs = enumerate_quads(lh, lv, ls, half, (wid, hgt), p=p, profiles=prof)
        quads[half] = qs[: p.quads_per_half]
        notes.append(f"{half}: {len(lh)} h-lines, {len(lv)} v-lines, {len(qs)} quads")
    alts = []
    sel_log = SelectionLog()
    hexangle = None
    if quads["top"] and quads["bottom"]:
        # crease lines may straddle the split, so they come from the whole image
        pool = top_lines(fht(hin, "horizontal"), p.k_lines, p.nms_radius)
        lines["crease"] = pool
        ctx = LocateContext(wid, hgt, pool, gh, gv, p)
        for qt in quads["top"]:
            for qb in quads["bottom"]:
                alts.extend(form_alternatives(qt, qb, ctx))
        notes.append(f"{len(alts)} hexangle alternatives")
        refine = None
        if p.refine_radius > 0:
            pts = (edge_points(eh), edge_points(ev))
            pol = edge_polarity(gray, eh)

            def refine(h):
                return refine_hexangle(h, eh, ev, p.refine_radius, p.refine_support, pts, polarity=pol)

        hexangle = select_hexangle(alts, (sm_h, sm_v), (wid, hgt), p, sel_log, refine)
        if hexangle is None:
            notes.append("no hexangle survived" + (f" (rejected: {sel_log.rejected})" if sel_log.rejected else ""))
    else:
        notes.append("no quad pair")
    return Localization(scale, gray, (eh, ev), (sm_h, sm_v), lines, quads, alts, sel_log, hexangle, notes)


def _to_full(h: Hexangle, scale) -> Hexangle:
    v = h.vertices / np.asarray(scale, dtype=float)
    return Hexangle(v, Line2.through(v[5], v[2]), validate=False)


def unfold_timed(img: np.ndarray, p: Params = DEFAULT_PARAMS, debug_dir: str | Path | None = None) -> UnfoldResult:
    """Run the pipeline and record the localization (L) and warp (T) times in ms."""
    if not isinstance(img, np.ndarray):
        raise ImageError("image must be a numpy array")
    check_image(img, MIN_INPUT)
    t0 = time.perf_counter()
    loc = localize(img, p)
    full = _to_full(loc.hexangle, loc.scale) if loc.hexangle is not None else None
    t1 = time.perf_counter()
    result = None
    if full is not None:
        try:
            out = rectify(img, full, p)
            result = UnfoldResult("rectified", out.image, full, diagnostics=list(loc.notes),
                                  homographies=out.homographies)
        except RectificationError as exc:
            loc.notes.append(str(exc))
    t2 = time.perf_counter()
    if result is None:
        result = UnfoldResult("trivial", img, None, diagnostics=list(loc.notes))
    result.timings = {"L": (t1 - t0) * 1e3, "T": (t2 - t1) * 1e3, "total": (t2 - t0) * 1e3}
    if debug_dir is not None:
        from .debug import dump_debug

        dump_debug(debug_dir, loc, result)
    return result


def unfold(img: np.ndarray, p: Params = DEFAULT_PARAMS, debug_dir: str | Path | None = None) -> UnfoldResult:
    """Rectify a photo of a document folded in half, or return it unchanged."""
    return unfold_timed(img, p, debug_dir)
