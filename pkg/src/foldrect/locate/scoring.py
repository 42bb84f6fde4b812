"""Edge-support scores of polygons on smoothed edge maps.

A polygon side collects the smoothed edge response sampled every pixel of
arc length along it (``p``) and counts samples with (numerically) no
response (``r``); prolongations of the sides just outside the corners are
summed into a penalty ``q``.  The score is ``sum(p) / (r + 1) - q`` with ``r``
the fraction of empty samples.
"""
from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from ..geometry import BL, BR, CL, CR, TL, TR, Hexangle
from ..imaging import EdgeMap

ZERO_EPS = 1e-6


@dataclass(frozen=True)
class ScoreBreakdown:
    p_sum: float
    zero_ratio: float
    penalty: float
    total: float

    @classmethod
    def build(cls, p_sum: float, zero_ratio: float, penalty: float) -> "ScoreBreakdown":
        return cls(float(p_sum), float(zero_ratio), float(penalty), float(p_sum / (zero_ratio + 1.0) - penalty))


def _as_array(m) -> np.ndarray:
    return m.data if isinstance(m, EdgeMap) else m


def sample_map(m, pts: np.ndarray) -> np.ndarray:
    """Bilinear samples of a map at continuous image points (N, 2); zero outside."""
    data = _as_array(m)
    pts = np.asarray(pts, dtype=np.float32).reshape(-1, 2)
    if len(pts) == 0:
        return np.zeros(0, dtype=np.float64)
    # continuous coordinate x corresponds to array column x - 0.5
    mx = (pts[:, 0] - 0.5).reshape(1, -1)
    my = (pts[:, 1] - 0.5).reshape(1, -1)
    out = np.empty((1, len(pts)), dtype=np.float32)
    # remap accepts at most 32767 columns per row
    step = 32000
    for a in range(0, len(pts), step):
        b = min(len(pts), a + step)
        out[:, a:b] = cv2.remap(data, mx[:, a:b], my[:, a:b], cv2.INTER_LINEAR,
                                borderMode=cv2.BORDER_CONSTANT, borderValue=0)
    return out[0].astype(np.float64)


# the seven scored segments: (start vertex, end vertex, map: 0 = horizontal, 1 = vertical)
HEX_SEGMENTS = (
    (TL, TR, 0),
    (TR, CR, 1),
    (CR, BR, 1),
    (BR, BL, 0),
    (BL, CL, 1),
    (CL, TL, 1),
    (CL, CR, 0),
)
# outside prolongations: (vertex, away-from vertex, map)
HEX_PROLONG = (
    (TL, TR, 0), (TL, CL, 1),
    (TR, TL, 0), (TR, CR, 1),
    (BR, BL, 0), (BR, CR, 1),
    (BL, BR, 0), (BL, CL, 1),
    (CL, CR, 0),
    (CR, CL, 0),
)


def _segment_samples(p0: np.ndarray, p1: np.ndarray):
    """Unit-step sample points along segments p0 -> p1 (arrays (S, 2)).

    Returns (points (N, 2), owner index (N,), samples per segment (S,)).
    """
    d = p1 - p0
    lens = np.hypot(d[:, 0], d[:, 1])
    cnt = np.maximum(1, np.rint(lens)).astype(np.int64)
    owner = np.repeat(np.arange(len(p0)), cnt)
    starts = np.concatenate([[0], np.cumsum(cnt)[:-1]])
    j = np.arange(owner.size) - starts[owner]
    t = (j + 0.5) / cnt[owner]
    pts = p0[owner] + t[:, None] * d[owner]
    return pts, owner, cnt


def _prolong_samples(v: np.ndarray, away: np.ndarray, beta_p: int):
    """``beta_p`` points at distances 1..beta_p beyond ``v`` on the ray away -> v."""
    d = v - away
    n = np.hypot(d[:, 0], d[:, 1])
    n[n == 0] = 1.0
    u = d / n[:, None]
    k = np.arange(1, beta_p + 1, dtype=np.float64)
    pts = v[:, None, :] + k[None, :, None] * u[:, None, :]
    return pts.reshape(-1, 2)


def _unique_rows(*cols):
    """(index of first occurrence per unique row, inverse) of stacked columns."""
    key = np.ascontiguousarray(np.column_stack(cols).astype(np.float64))
    _, first, inv = np.unique(key.view(np.dtype((np.void, key.dtype.itemsize * key.shape[1]))).ravel(),
                              return_index=True, return_inverse=True)
    return first, inv.ravel()


def score_polylines(seg_p0, seg_p1, seg_map, seg_owner, pro_v, pro_away, pro_map, pro_owner,
                    count: int, sm_h, sm_v, beta_p: int):
    """Scores of ``count`` polygons given flat segment and prolongation lists.

    Segments (and prolongations) shared by several polygons are sampled once.
    Returns (p_sum, zero_ratio, penalty, total) arrays of length ``count``.
    """
    maps = (_as_array(sm_h), _as_array(sm_v))
    p_sum = np.zeros(count)
    zeros = np.zeros(count)
    nsamp = np.zeros(count)
    for mi in (0, 1):
        sel = np.nonzero(seg_map == mi)[0]
        if len(sel) == 0:
            continue
        first, inv = _unique_rows(seg_p0[sel], seg_p1[sel])
        u = sel[first]
        pts, owner, cnt = _segment_samples(seg_p0[u], seg_p1[u])
        vals = sample_map(maps[mi], pts)
        nu = len(u)
        seg_sum = np.bincount(owner, weights=vals, minlength=nu)
        seg_zero = np.bincount(owner, weights=(vals < ZERO_EPS).astype(np.float64), minlength=nu)
        poly = seg_owner[sel]
        p_sum += np.bincount(poly, weights=seg_sum[inv], minlength=count)
        zeros += np.bincount(poly, weights=seg_zero[inv], minlength=count)
        nsamp += np.bincount(poly, weights=cnt[inv].astype(np.float64), minlength=count)
    penalty = np.zeros(count)
    for mi in (0, 1):
        sel = np.nonzero(pro_map == mi)[0]
        if len(sel) == 0 or beta_p <= 0:
            continue
        first, inv = _unique_rows(pro_v[sel], pro_away[sel])
        u = sel[first]
        pts = _prolong_samples(pro_v[u], pro_away[u], beta_p)
        vals = sample_map(maps[mi], pts).reshape(len(u), beta_p).sum(axis=1)
        penalty += np.bincount(pro_owner[sel], weights=vals[inv], minlength=count)
    zr = np.divide(zeros, nsamp, out=np.ones(count), where=nsamp > 0)
    total = p_sum / (zr + 1.0) - penalty
    return p_sum, zr, penalty, total


def score_hexangles(verts: np.ndarray, sm_h, sm_v, beta_p: int):
    """Vectorized contour score of B hexangles given as a (B, 6, 2) array."""
    verts = np.asarray(verts, dtype=np.float64).reshape(-1, 6, 2)
    b = len(verts)
    if b == 0:
        z = np.zeros(0)
        return z, z, z, z
    si = np.array([s[0] for s in HEX_SEGMENTS])
    ei = np.array([s[1] for s in HEX_SEGMENTS])
    mi = np.array([s[2] for s in HEX_SEGMENTS])
    seg_p0 = verts[:, si].reshape(-1, 2)
    seg_p1 = verts[:, ei].reshape(-1, 2)
    seg_map = np.tile(mi, b)
    seg_owner = np.repeat(np.arange(b), len(HEX_SEGMENTS))
    pv = np.array([s[0] for s in HEX_PROLONG])
    pa = np.array([s[1] for s in HEX_PROLONG])
    pm = np.array([s[2] for s in HEX_PROLONG])
    pro_v = verts[:, pv].reshape(-1, 2)
    pro_a = verts[:, pa].reshape(-1, 2)
    pro_map = np.tile(pm, b)
    pro_owner = np.repeat(np.arange(b), len(HEX_PROLONG))
    return score_polylines(seg_p0, seg_p1, seg_map, seg_owner, pro_v, pro_a, pro_map, pro_owner,
                           b, sm_h, sm_v, beta_p)


def contour_score(h: Hexangle, sm_h, sm_v, p) -> ScoreBreakdown:
    """Edge support of a hexangle: seven segments plus corner prolongation penalty."""
    ps, zr, q, _ = score_hexangles(h.vertices[None], sm_h, sm_v, p.beta_p)
    return ScoreBreakdown.build(ps[0], zr[0], q[0])


class LineProfiles:
    """Map responses sampled every pixel along whole lines, with prefix sums.

    Used to score many polygons whose sides lie on a small set of lines:
    a side from parameter ``ta`` to ``tb`` collects the samples at positions
    ``t0 + j`` with ``ta <= t0 + j < tb``.
    """

    def __init__(self, lines, sm, width: float, height: float, margin: float = 16.0):
        data = _as_array(sm)
        k = len(lines)
        self.k = k
        self.dirs = np.zeros((k, 2))
        self.base = np.zeros((k, 2))
        self.t0 = np.zeros(k)
        rows = []
        cx, cy = width / 2.0, height / 2.0
        reach = 0.5 * float(np.hypot(width, height)) + margin
        for i, ln in enumerate(lines):
            l = getattr(ln, "line", ln)
            d = np.array([l.b, -l.a])
            foot = np.array(l.project((cx, cy)))
            self.dirs[i] = d
            self.base[i] = foot
            self.t0[i] = -np.floor(reach)
        m = int(2 * np.floor(reach)) + 1
        self.m = m
        if k:
            j = np.arange(m, dtype=np.float64)
            t = self.t0[:, None] + j[None, :]
            pts = self.base[:, None, :] + t[:, :, None] * self.dirs[:, None, :]
            vals = sample_map(data, pts.reshape(-1, 2)).reshape(k, m)
        else:
            vals = np.zeros((0, m))
        self.vals = vals
        self.csum = np.concatenate([np.zeros((k, 1)), np.cumsum(vals, axis=1)], axis=1)
        zc = (vals < ZERO_EPS).astype(np.float64)
        self.zsum = np.concatenate([np.zeros((k, 1)), np.cumsum(zc, axis=1)], axis=1)

    def param(self, idx: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """Arc-length parameter of points (assumed on their lines)."""
        return ((pts - self.base[idx]) * self.dirs[idx]).sum(axis=-1)

    def _index(self, idx, t, how):
        x = t - self.t0[idx]
        j = np.ceil(x) if how == "ceil" else np.floor(x) + 1
        return np.clip(j, 0, self.m).astype(np.int64)

    def span(self, idx: np.ndarray, ta: np.ndarray, tb: np.ndarray):
        """(response sum, zero count, sample count) of each span [min, max)."""
        lo = np.minimum(ta, tb)
        hi = np.maximum(ta, tb)
        ja = self._index(idx, lo, "ceil")
        jb = self._index(idx, hi, "ceil")
        s = self.csum[idx, jb] - self.csum[idx, ja]
        z = self.zsum[idx, jb] - self.zsum[idx, ja]
        return s, z, (jb - ja).astype(np.float64)

    def beyond(self, idx: np.ndarray, tv: np.ndarray, sign: np.ndarray, n: int) -> np.ndarray:
        """Sum of the ``n`` samples just past ``tv`` in direction ``sign`` (+1/-1)."""
        fwd = sign > 0
        # forward: samples with tv < t <= tv + n ; backward: tv - n <= t < tv
        ja_f = self._index(idx, tv, "floor")
        jb_f = self._index(idx, tv + n, "floor")
        ja_b = self._index(idx, tv - n, "ceil")
        jb_b = self._index(idx, tv, "ceil")
        ja = np.where(fwd, ja_f, ja_b)
        jb = np.where(fwd, jb_f, jb_b)
        return self.csum[idx, jb] - self.csum[idx, ja]
