"""Continuity correction, aspect-ratio filtering and final choice of the hexangle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import GeometryError, Hexangle, angle_between_deg, apply_V, aspect_ratio, is_convex_cw
from .scoring import score_hexangles


@dataclass
class SelectionLog:
    """Diagnostics of one selection run (optional, for debug dumps)."""

    scores: list = field(default_factory=list)
    tried: list = field(default_factory=list)
    chosen: int = -1
    original: Hexangle | None = None
    rejected: str = ""


def ratio_gate(h: Hexangle, img_dims, p) -> tuple[bool, tuple[float, float]]:
    """Both half aspect ratios within ``ratio_tol * r0`` of ``r0``."""
    w, hgt = img_dims
    focal = p.lam * w
    principal = (w / 2.0, hgt / 2.0)
    try:
        rt = aspect_ratio(h.upper, focal, principal)
        rb = aspect_ratio(h.lower, focal, principal)
    except GeometryError:
        return False, (math.nan, math.nan)
    ok = max(abs(rt - p.r0), abs(rb - p.r0)) < p.ratio_tol * p.r0
    return ok, (rt, rb)


def correction_too_large(h: Hexangle, hc: Hexangle, img_dims, p) -> str:
    """Reason string if the correction rotated a horizontal segment or moved a vertex too much."""
    for a, b in ((h.top, hc.top), (h.crease, hc.crease), (h.bottom, hc.bottom)):
        da = np.subtract(a[1], a[0])
        db = np.subtract(b[1], b[0])
        if angle_between_deg(da, db) > p.phi_max_v:
            return "rotation"
    moved = np.hypot(*(hc.vertices - h.vertices).T).max()
    if moved > p.rho_max_v * img_dims[1]:
        return "displacement"
    return ""


def _valid(hc: Hexangle) -> bool:
    v = hc.vertices
    return bool(np.all(np.isfinite(v)) and is_convex_cw(v[[0, 1, 2, 5]]) and is_convex_cw(v[[5, 2, 3, 4]]))


def _refined(h, hc, refine, img_dims, p):
    hr = refine(h)
    if hr is h:
        return h, hc
    try:
        hrc = apply_V(hr)
    except GeometryError:
        return h, hc
    if _valid(hrc) and ratio_gate(hrc, img_dims, p)[0]:
        return hr, hrc
    return h, hc


def select_hexangle(alts, maps, img_dims, p, log: SelectionLog | None = None, refine=None) -> Hexangle | None:
    """Best corrected hexangle, or None.

    Each alternative is corrected to the continuity criterion; corrected
    hexangles whose half aspect ratios miss the expected ratio are dropped.
    Among the rest the one whose *uncorrected* form scores highest wins.  The
    winner is rejected altogether (None) if the correction turned one of its
    horizontal segments by more than ``phi_max_v`` degrees or moved a vertex
    by more than ``rho_max_v`` of the image height.

    ``refine`` (optional) maps the winning hexangle to a refined one; the
    refined hexangle replaces it when it still corrects to a valid hexangle
    passing the ratio gate.  The rejection test then applies to the refined
    hexangle and its correction.
    """
    if not alts:
        return None
    sm_h, sm_v = maps
    verts = np.stack([a.hex.vertices for a in alts])
    totals = score_hexangles(verts, sm_h, sm_v, p.beta_p)[3]
    order = np.lexsort((np.arange(len(alts)), -totals))
    if log is not None:
        log.scores = totals.tolist()
    # scores do not depend on the correction, so the first alternative in
    # score order that survives correction and the ratio gate is the argmax
    for i in order.tolist():
        h = alts[i].hex
        try:
            hc = apply_V(h)
        except GeometryError:
            if log is not None:
                log.tried.append((i, "correction failed"))
            continue
        if not _valid(hc):
            if log is not None:
                log.tried.append((i, "invalid after correction"))
            continue
        ok, ratios = ratio_gate(hc, img_dims, p)
        if log is not None:
            log.tried.append((i, "ok" if ok else f"ratio {ratios[0]:.3f}/{ratios[1]:.3f}"))
        if not ok:
            continue
        if refine is not None:
            h, hc = _refined(h, hc, refine, img_dims, p)
        if log is not None:
            log.chosen = i
            log.original = h
        reason = correction_too_large(h, hc, img_dims, p)
        if reason:
            if log is not None:
                log.rejected = reason
            return None
        return hc
    return None
