"""Brute-force search of page-half quadrilaterals among detected lines."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import Line2, Quadrilateral
from ..hough import LineH
from .scoring import LineProfiles


@dataclass
class ScoredQuad:
    """A page-half candidate with its contour score.

    ``lines`` holds the indices (horizontal, left vertical, right vertical)
    into the line lists the quad was built from; ``side_graphs`` the path
    graphs assigned to the left and right vertical sides (filled later).
    """

    quad: Quadrilateral
    score: float
    half: str
    lines: tuple[int, int, int] = (-1, -1, -1)
    side_graphs: list = field(default_factory=lambda: [None, None])
    breakdown: tuple = (0.0, 0.0, 0.0)

    @property
    def vertices(self) -> np.ndarray:
        return self.quad.vertices


def _coeffs(lines) -> np.ndarray:
    out = np.empty((len(lines), 3))
    for i, ln in enumerate(lines):
        l = getattr(ln, "line", ln)
        out[i] = (l.a, l.b, l.c)
    return out


def _meet(a: np.ndarray, b: np.ndarray):
    """Pairwise intersections of line arrays a (n, 3) and b (m, 3) -> (n, m, 2), finite mask."""
    x = np.cross(a[:, None, :], b[None, :, :])
    w = x[..., 2]
    scale = np.abs(x).max(axis=-1)
    ok = np.abs(w) > 1e-12 * np.maximum(scale, 1e-300)
    wsafe = np.where(ok, w, 1.0)
    pts = x[..., :2] / wsafe[..., None]
    return pts, ok


def _cross(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])


def quad_corners(lh, lv, ls: Line2, half: str):
    """All (horizontal, vertical, vertical) combinations and their corners.

    Returns (idx (N, 3) with [h, left, right], corners (N, 4, 2) in TL, TR,
    BR, BL order, finite mask (N,)).
    """
    ch = _coeffs(lh)
    cv = _coeffs(lv)
    cs = _coeffs([ls])
    a, ok_a = _meet(ch, cv)          # (nh, nv, 2)
    s, ok_s = _meet(cs, cv)          # (1, nv, 2)
    s, ok_s = s[0], ok_s[0]
    nh, nv = len(lh), len(lv)
    j1, j2 = np.triu_indices(nv, 1)
    ii = np.repeat(np.arange(nh), len(j1))
    j1 = np.tile(j1, nh)
    j2 = np.tile(j2, nh)
    swap = s[j1, 0] > s[j2, 0]
    jl = np.where(swap, j2, j1)
    jr = np.where(swap, j1, j2)
    al = a[ii, jl]
    ar = a[ii, jr]
    sl = s[jl]
    sr = s[jr]
    if half == "top":
        corners = np.stack([al, ar, sr, sl], axis=1)
    elif half == "bottom":
        corners = np.stack([sl, sr, ar, al], axis=1)
    else:
        raise ValueError("half must be 'top' or 'bottom'")
    ok = ok_a[ii, jl] & ok_a[ii, jr] & ok_s[jl] & ok_s[jr]
    idx = np.stack([ii, jl, jr], axis=1)
    return idx, corners, ok


def valid_quads_mask(corners: np.ndarray, ok: np.ndarray, half: str, img_dims, min_area_frac: float) -> np.ndarray:
    """Convex, clockwise, inside the half image and large enough."""
    w, h = float(img_dims[0]), float(img_dims[1])
    hh = h / 2.0
    c = np.where(ok[:, None, None], corners, 0.0)
    tol = 1e-6
    xs, ys = c[..., 0], c[..., 1]
    inside = (xs >= -tol).all(1) & (xs <= w + tol).all(1)
    if half == "top":
        inside &= (ys >= -tol).all(1) & (ys <= hh + tol).all(1)
    else:
        inside &= (ys >= hh - tol).all(1) & (ys <= h + tol).all(1)
    scale = max(w, h)
    convex = np.ones(len(c), dtype=bool)
    for k in range(4):
        cr = _cross(c[:, k], c[:, (k + 1) % 4], c[:, (k + 2) % 4])
        convex &= cr > 1e-9 * scale * scale
    x, y = c[..., 0], c[..., 1]
    area = 0.5 * ((x * np.roll(y, -1, axis=1)).sum(1) - (np.roll(x, -1, axis=1) * y).sum(1))
    big = area >= min_area_frac * w * hh
    return ok & inside & convex & big


def enumerate_quads(lh, lv, ls: Line2, half: str, img_dims, sm_h=None, sm_v=None, p=None,
                    profiles=None) -> list[ScoredQuad]:
    """All valid quads of one half, scored by their three non-separator sides.

    A quad is bounded by one horizontal line, the half-split line ``ls`` and
    two vertical lines.  The score reuses the contour-score formula on the
    horizontal side and the two vertical sides; the penalty is taken at the
    two outer corners, along both sides' outward prolongations.

    ``profiles`` may carry precomputed (horizontal, vertical) LineProfiles for
    ``lh`` and ``lv``; otherwise they are built from ``sm_h``/``sm_v``.
    """
    if len(lh) == 0 or len(lv) < 2:
        return []
    w, h = img_dims
    min_area = getattr(p, "quad_min_area", 0.02)
    beta_p = int(getattr(p, "beta_p", 10))
    idx, corners, ok = quad_corners(lh, lv, ls, half)
    keep = valid_quads_mask(corners, ok, half, img_dims, min_area)
    if not np.any(keep):
        return []
    idx = idx[keep]
    corners = corners[keep]
    if profiles is None:
        if sm_h is None or sm_v is None:
            raise ValueError("smoothed maps or profiles are required for scoring")
        profiles = (LineProfiles(lh, sm_h, w, h), LineProfiles(lv, sm_v, w, h))
    ph, pv = profiles
    if half == "top":
        ol, orr, il, ir = corners[:, 0], corners[:, 1], corners[:, 3], corners[:, 2]
    else:
        ol, orr, il, ir = corners[:, 3], corners[:, 2], corners[:, 0], corners[:, 1]
    ih, jl, jr = idx[:, 0], idx[:, 1], idx[:, 2]
    # horizontal side
    tl = ph.param(ih, ol)
    tr = ph.param(ih, orr)
    sh, zh, nh = ph.span(ih, tl, tr)
    # vertical sides
    tvl_o = pv.param(jl, ol)
    tvl_i = pv.param(jl, il)
    tvr_o = pv.param(jr, orr)
    tvr_i = pv.param(jr, ir)
    svl, zvl, nvl = pv.span(jl, tvl_o, tvl_i)
    svr, zvr, nvr = pv.span(jr, tvr_o, tvr_i)
    p_sum = sh + svl + svr
    n = nh + nvl + nvr
    zr = np.divide(zh + zvl + zvr, n, out=np.ones_like(n), where=n > 0)
    # penalties beyond the outer corners
    q = (ph.beyond(ih, tl, np.sign(tl - tr), beta_p)
         + ph.beyond(ih, tr, np.sign(tr - tl), beta_p)
         + pv.beyond(jl, tvl_o, np.sign(tvl_o - tvl_i), beta_p)
         + pv.beyond(jr, tvr_o, np.sign(tvr_o - tvr_i), beta_p))
    total = p_sum / (zr + 1.0) - q
    order = np.lexsort((np.arange(len(total)), -total))
    out = []
    for k in order.tolist():
        out.append(ScoredQuad(Quadrilateral(corners[k], validate=False), float(total[k]), half,
                              (int(ih[k]), int(jl[k]), int(jr[k])),
                              breakdown=(float(p_sum[k]), float(zr[k]), float(q[k]))))
    return out
