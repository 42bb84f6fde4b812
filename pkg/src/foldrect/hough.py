"""Fast Hough transform over dyadic line patterns and line extraction.

A *family* groups lines by dominant direction: "horizontal" lines make an
angle below 45 degrees with the x axis, "vertical" ones with the y axis.  For
a family the image is viewed in a frame whose *pattern axis* runs along the
lines (x for horizontal lines) and whose *shift axis* is across them.  The
pattern axis is zero-padded to a power of two ``n``, the shift axis to
``h + n`` so that lines leaving the frame wrap into empty padding instead of
onto real pixels.  Lines rising along the shift axis are summed on the
frame directly, falling ones on the frame flipped along the shift axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._kernels import fht_core, local_maxima
from .geometry import Line2, Point2
from .imaging import EdgeMap

FAMILIES = ("horizontal", "vertical")


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


@lru_cache(maxsize=64)
def _pattern_table(n: int) -> np.ndarray:
    offs = np.zeros((1, 1), dtype=np.int64)
    m = 1
    while m < n:
        new = np.empty((2 * m, 2 * m), dtype=np.int64)
        for s in range(2 * m):
            h = s // 2
            new[s, :m] = offs[h]
            new[s, m:] = offs[h] + (s - h)
        offs = new
        m *= 2
    offs.setflags(write=False)
    return offs


def pattern_offsets(n: int, s: int) -> np.ndarray:
    """Offsets along the shift axis of the dyadic pattern of shift ``s`` over ``n`` cells."""
    if n & (n - 1) or n < 1:
        raise ValueError("n must be a power of two")
    if not 0 <= s < n:
        raise ValueError("shift out of range")
    return _pattern_table(n)[s]


@dataclass
class HoughImage:
    """Accumulators of one line family over one image region.

    ``acc[0]`` holds rising patterns, ``acc[1]`` falling ones; ``acc[k, s, y0]``
    is the sum along the pattern of shift ``s`` starting at frame row ``y0``.
    ``width``/``height`` are the region's size in image axes and ``origin``
    its top-left corner in the full image.
    """

    family: str
    acc: np.ndarray
    n: int
    hp: int
    width: int
    height: int
    origin: tuple[float, float] = (0.0, 0.0)

    @property
    def accumulator(self) -> np.ndarray:
        return self.acc

    @property
    def frame_len(self) -> int:
        """Extent of the region along the pattern axis."""
        return self.width if self.family == "horizontal" else self.height

    @property
    def frame_depth(self) -> int:
        """Extent of the region along the shift axis."""
        return self.height if self.family == "horizontal" else self.width

    def start_row(self, y0: int) -> int:
        """Unwrapped frame row of a cyclic start index."""
        return y0 if y0 < self.frame_depth else y0 - self.hp

    def cell_endpoints(self, sign: int, s: int, y0: int) -> tuple[Point2, Point2]:
        """Image-space endpoints (pixel centres) of the pattern of a cell.

        The first and last pattern cells are the exact rasterized endpoints of
        the pattern, so the line through them is used as the cell's line.
        """
        d = self.frame_depth
        ys = self.start_row(y0)
        if sign == 0:
            a, b = ys, ys + s
        else:
            a, b = d - 1 - ys, d - 1 - ys - s
        u0, u1 = 0.5, self.n - 0.5
        v0, v1 = a + 0.5, b + 0.5
        ox, oy = self.origin
        if self.family == "horizontal":
            return Point2(u0 + ox, v0 + oy), Point2(u1 + ox, v1 + oy)
        return Point2(v0 + ox, u0 + oy), Point2(v1 + ox, u1 + oy)

    def cell_line(self, sign: int, s: int, y0: int) -> Line2:
        p, q = self.cell_endpoints(sign, s, y0)
        return Line2.through(p, q)


@dataclass
class LineH:
    """A detected line with its accumulator value."""

    line: Line2
    brightness: float
    family: str
    cell: tuple[int, int, int] = (0, 0, 0)
    # position used for non-maximum suppression: line position across the
    # region at its first and last pixel along the region
    key: tuple[float, float] = field(default=(0.0, 0.0), repr=False)

    def distance(self, p) -> float:
        return self.line.distance(p)


def _frame(data: np.ndarray, family: str) -> np.ndarray:
    """(pattern axis, shift axis) view of an image-shaped array."""
    return data.T if family == "horizontal" else data


def _accumulate_dtype(data: np.ndarray, n: int):
    if np.issubdtype(data.dtype, np.integer) or np.array_equal(data, np.round(data)):
        mx = float(np.abs(data).max()) if data.size else 0.0
        if mx * n < 2 ** 31 - 1:
            return np.int32
        return np.float64
    return np.float64


def fht(em: EdgeMap | np.ndarray, family: str, origin=(0.0, 0.0)) -> HoughImage:
    """Dyadic fast Hough transform of an edge map for one line family.

    Each accumulator cell is the exact sum of the map values along its
    pattern; integer-valued maps are summed in integer arithmetic.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    data = em.data if isinstance(em, EdgeMap) else np.asarray(em)
    if data.ndim != 2 or data.size == 0:
        raise ValueError("edge map must be a non-empty 2-D array")
    h, w = data.shape
    fr = _frame(data, family)
    length, depth = fr.shape
    n = next_pow2(length)
    hp = depth + n
    dt = _accumulate_dtype(data, n)
    acc = np.empty((2, n, hp), dtype=dt)
    buf = np.zeros((n, hp), dtype=dt)
    buf[:length, :depth] = fr
    fht_core(buf, acc[0])
    buf[:, :] = 0
    buf[:length, :depth] = fr[:, ::-1]
    fht_core(buf, acc[1])
    return HoughImage(family, acc, n, hp, w, h, (float(origin[0]), float(origin[1])))


def naive_fht(data: np.ndarray, family: str) -> np.ndarray:
    """Direct pattern-sum reference, O(n^3); returns the (2, n, hp) accumulator."""
    fr = _frame(np.asarray(data), family)
    length, depth = fr.shape
    n = next_pow2(length)
    hp = depth + n
    out = np.zeros((2, n, hp), dtype=np.float64)
    for sign, f in enumerate((fr, fr[:, ::-1])):
        pad = np.zeros((n, hp))
        pad[:length, :depth] = f
        for s in range(n):
            offs = pattern_offsets(n, s)
            for y0 in range(hp):
                out[sign, s, y0] = pad[np.arange(n), (y0 + offs) % hp].sum()
    return out


def top_lines(hi: HoughImage, k: int, nms_radius: int = 4) -> list[LineH]:
    """The ``k`` strongest lines after greedy non-maximum suppression.

    Candidates are accumulator local maxima.  Each is described by the
    positions of its line across the region at the first and the last
    pixel along the region (both slope signs share this space); a candidate
    is dropped when an accepted one lies within ``nms_radius`` pixels in
    Chebyshev distance of that pair.  Shifts equal to ``n - 1``
    (exactly 45 degrees) are skipped to keep the families disjoint.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    peak = float(hi.acc.max()) if hi.acc.size else 0.0
    if peak <= 0:
        return []
    # Greedy suppression visits candidates by decreasing value, so running it
    # on the candidates above a threshold gives the same answer as on all of
    # them whenever k lines get accepted before the threshold is reached.
    out = _top_lines_above(hi, k, nms_radius, peak / 8.0)
    if len(out) < k:
        out = _top_lines_above(hi, k, nms_radius, 0.0)
    return out


def _top_lines_above(hi: HoughImage, k: int, nms_radius: int, thr: float) -> list[LineH]:
    smax = hi.n - 1 if hi.n > 1 else 1
    cand_s, cand_y, cand_v, cand_sign = [], [], [], []
    for sign in (0, 1):
        s, y, v = local_maxima(hi.acc[sign], smax, thr)
        cand_s.append(s)
        cand_y.append(y)
        cand_v.append(v)
        cand_sign.append(np.full(len(s), sign, dtype=np.int32))
    s = np.concatenate(cand_s)
    y = np.concatenate(cand_y)
    v = np.concatenate(cand_v)
    sg = np.concatenate(cand_sign)
    if len(v) == 0:
        return []
    depth = hi.frame_depth
    ys = np.where(y < depth, y, y - hi.hp)
    # line position across the region at both ends of its extent along the
    # pattern axis (pixel centres); duplicates of one physical line with
    # neighbouring dyadic slopes end up close in both coordinates
    a = np.where(sg == 0, ys, depth - 1 - ys).astype(np.float64)
    b = np.where(sg == 0, a + s, a - s)
    t = (hi.frame_len - 1) / max(hi.n - 1, 1)
    key_k = a
    key_y = a + (b - a) * t
    # deterministic order: brightness desc, then sign, shift, start
    order = np.lexsort((y, s, sg, -v))
    acc_k: list[float] = []
    acc_y: list[float] = []
    out: list[LineH] = []
    r = nms_radius
    for idx in order.tolist():
        kk, ky = float(key_k[idx]), float(key_y[idx])
        ok = True
        for ak, ay in zip(acc_k, acc_y):
            if abs(ak - kk) <= r and abs(ay - ky) <= r:
                ok = False
                break
        if not ok:
            continue
        acc_k.append(kk)
        acc_y.append(ky)
        cell = (int(sg[idx]), int(s[idx]), int(y[idx]))
        out.append(LineH(hi.cell_line(*cell), float(v[idx]), hi.family, cell, (kk, ky)))
        if len(out) >= k:
            break
    return out


def brightest_near(lines, p, radius: float) -> LineH | None:
    """Brightest line whose distance to ``p`` is below ``radius``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    best = None
    for ln in lines:
        if ln.line.distance(p) < radius and (best is None or ln.brightness > best.brightness):
            best = ln
    return best


def line_angle_deg(line: Line2) -> float:
    """Angle of a line with the x axis in (-90, 90]."""
    return line.angle_deg()


def in_family(line: Line2, family: str) -> bool:
    a = abs(line.angle_deg())
    return a < 45 if family == "horizontal" else a > 45


def accumulator_image(hi: HoughImage) -> np.ndarray:
    """Both sign accumulators side by side, scaled to 0..255 for dumps."""
    a = np.concatenate([hi.acc[0], hi.acc[1]], axis=1).astype(np.float64)
    mx = a.max()
    if mx > 0:
        a = a * (255.0 / mx)
    return a.astype(np.uint8)


def hough_lines(em: EdgeMap, family: str, k: int, nms_radius: int, origin=(0.0, 0.0)) -> list[LineH]:
    """FHT of a binary version of ``em`` followed by :func:`top_lines`."""
    binary = (em.data > 0).astype(np.uint8)
    return top_lines(fht(binary, family, origin), k, nms_radius)


