"""Image plumbing and edge maps.

Images are plain numpy arrays: ``(H, W)`` uint8 for grayscale and
``(H, W, 3)`` uint8 in RGB order for color.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from ._kernels import link_rows
from .geometry import Point2

MIN_SIDE = 16
BOX_LEN = 5


class ImageError(ValueError):
    """Unreadable, unwritable or unsuitable image."""


def check_image(img: np.ndarray, min_side: int = MIN_SIDE) -> None:
    if not isinstance(img, np.ndarray) or img.dtype != np.uint8:
        raise ImageError("image must be a uint8 numpy array")
    if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] not in (1, 3)):
        raise ImageError(f"unsupported image shape {img.shape}")
    if min(img.shape[:2]) < min_side:
        raise ImageError("too small")


def load_image(path: str | Path) -> np.ndarray:
    """Decode an image file into an RGB (or grayscale) uint8 array."""
    data = np.fromfile(str(path), dtype=np.uint8) if Path(path).is_file() else None
    if data is None or data.size == 0:
        raise ImageError(f"cannot read image {path}")
    img = cv2.imdecode(data, cv2.IMREAD_UNCHANGED)
    if img is None:
        raise ImageError(f"cannot decode image {path}")
    if img.dtype != np.uint8:
        # e.g. 16-bit TIFF references
        img = cv2.convertScaleAbs(img, alpha=255.0 / max(1, int(img.max())))
    if img.ndim == 3:
        if img.shape[2] == 4:
            img = cv2.cvtColor(img, cv2.COLOR_BGRA2RGB)
        elif img.shape[2] == 3:
            img = cv2.cvtColor(img, cv2.COLOR_BGR2RGB)
        else:
            img = img[:, :, 0]
    return np.ascontiguousarray(img)


def save_image(path: str | Path, img: np.ndarray, jpeg_quality: int = 95) -> None:
    path = Path(path)
    out = img if img.ndim == 2 else cv2.cvtColor(img, cv2.COLOR_RGB2BGR)
    ext = path.suffix.lower() or ".png"
    params = [cv2.IMWRITE_JPEG_QUALITY, jpeg_quality] if ext in (".jpg", ".jpeg") else []
    ok, buf = cv2.imencode(ext, out, params)
    if not ok:
        raise ImageError(f"cannot encode image as {ext}")
    try:
        buf.tofile(str(path))
    except OSError as exc:
        raise ImageError(f"cannot write {path}: {exc}") from exc


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Luma ``round(0.299 R + 0.587 G + 0.114 B)``; grayscale input is returned as is."""
    if img.ndim == 2:
        return img
    if img.shape[2] == 1:
        return img[:, :, 0]
    f = img.astype(np.float64)
    y = 0.299 * f[:, :, 0] + 0.587 * f[:, :, 1] + 0.114 * f[:, :, 2]
    return np.floor(y + 0.5).astype(np.uint8)


def working_scale(shape, w_work: int) -> float:
    """Factor taking full-resolution coordinates to the working resolution."""
    return min(1.0, w_work / float(max(shape[0], shape[1])))


def to_working(img: np.ndarray, w_work: int) -> tuple[np.ndarray, tuple[float, float]]:
    """Downscale so the longer side is ``w_work`` px.

    Returns the image and the (x, y) factors taking full-resolution
    continuous coordinates to working ones (they differ slightly because the
    target size is rounded).  Large reductions first go through a cheap
    bilinear pass to twice the target size and then an area-average pass,
    which is much faster than a single area resize.
    """
    h, w = img.shape[:2]
    s = working_scale(img.shape, w_work)
    if s >= 1.0:
        return img, (1.0, 1.0)
    tw = max(1, int(round(w * s)))
    th = max(1, int(round(h * s)))
    src = img
    if w > 4 * tw:
        src = cv2.resize(img, (2 * tw, 2 * th), interpolation=cv2.INTER_LINEAR)
    return cv2.resize(src, (tw, th), interpolation=cv2.INTER_AREA), (tw / w, th / h)


@dataclass
class EdgeMap:
    """Non-negative edge response raster of one orientation.

    ``orientation == "vertical"`` holds edges running top-to-bottom (strong
    horizontal gradient), at most one non-zero pixel per row run after
    thinning; "horizontal" is the transpose.
    """

    data: np.ndarray
    orientation: str
    offset: np.ndarray | None = None   # sub-pixel position across the edge, in [-0.5, 0.5]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.data))


def otsu_threshold(values: np.ndarray, bins: int = 256) -> float:
    """Otsu's threshold of a 1-D sample; returns a value v, class 1 is ``> v``.

    Computed on a histogram of ``bins`` equal-width bins over the value range;
    the returned threshold is the upper edge of the last bin of the low class.
    A sample with a single distinct value yields a threshold just below it
    (nothing is discarded).
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        return 0.0
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return lo - 1.0
    hist, edges = np.histogram(values, bins=bins, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    w0 = np.cumsum(hist).astype(np.float64)
    w1 = w0[-1] - w0
    m0 = np.cumsum(hist * centers)
    mt = m0[-1]
    valid = (w0 > 0) & (w1 > 0)
    mu0 = np.divide(m0, w0, out=np.zeros_like(m0), where=w0 > 0)
    mu1 = np.divide(mt - m0, w1, out=np.zeros_like(m0), where=w1 > 0)
    between = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -1.0)
    k = int(np.argmax(between))
    if between[k] < 0:
        return lo - 1.0
    return float(edges[k + 1])


def _directional_nms(g: np.ndarray) -> np.ndarray:
    """Keep per-row local maxima of ``g`` along axis 1 (>= left, > right).

    The first and last column never survive.
    """
    keep = np.zeros(g.shape, dtype=bool)
    c = g[:, 1:-1]
    keep[:, 1:-1] = (c > 0) & (c >= g[:, :-2]) & (c > g[:, 2:])
    return keep


def _vertical_response(gray: np.ndarray) -> np.ndarray:
    """|d/dx| of the image box-summed over ``BOX_LEN`` rows; columns 0 and W-1 are 0."""
    f = gray.astype(np.float32)
    box = cv2.boxFilter(f, -1, (1, BOX_LEN), normalize=False, borderType=cv2.BORDER_REPLICATE)
    g = np.zeros_like(box)
    g[:, 1:-1] = np.abs(box[:, 2:] - box[:, :-2])
    return g


def _subpixel_offset(g: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Parabolic peak offset along axis 1 at kept pixels (0 elsewhere)."""
    off = np.zeros(g.shape, dtype=np.float32)
    gl, gc, gr = g[:, :-2], g[:, 1:-1], g[:, 2:]
    den = gl - 2.0 * gc + gr
    k = keep[:, 1:-1] & (den < 0)
    o = np.zeros_like(gc)
    np.divide(0.5 * (gl - gr), den, out=o, where=k)
    off[:, 1:-1] = np.clip(o, -0.5, 0.5)
    return off


def _thin(g: np.ndarray, threshold: str, with_offset: bool = False):
    keep = _directional_nms(g)
    vals = g[keep]
    if vals.size == 0:
        z = np.zeros_like(g)
        return (z, np.zeros_like(g)) if with_offset else z
    if threshold == "otsu-log":
        t = math.expm1(otsu_threshold(np.log1p(vals)))
    elif threshold == "otsu":
        t = otsu_threshold(vals)
    else:
        t = 0.0
    out = np.where(keep & (g > t), g, 0).astype(np.float32)
    if with_offset:
        return out, np.where(out > 0, _subpixel_offset(g, keep), 0).astype(np.float32)
    return out


def extract_edges(gray: np.ndarray, threshold: str = "otsu-log") -> tuple[EdgeMap, EdgeMap]:
    """Horizontal and vertical edge maps of a grayscale image.

    The vertical map is the absolute central difference along x of the image
    box-summed over 5 rows, thinned by non-maximum suppression along each row
    and thresholded; the horizontal map is the same construction on the
    transposed image.  Responses are integer valued.  Each map also carries
    the parabolic sub-pixel offset of every kept maximum across the edge.

    ``threshold`` selects the adaptive threshold over the surviving maxima:
    "otsu-log" (Otsu on log(1 + response), the default), "otsu" (Otsu on raw
    responses) or "none".

    Returns:
        (E_h, E_v) at the resolution of ``gray``.
    """
    if gray.ndim != 2:
        raise ImageError("extract_edges expects a grayscale image")
    if min(gray.shape) < MIN_SIDE:
        raise ImageError("too small")
    ev, ov = _thin(_vertical_response(gray), threshold, True)
    eh, oh = _thin(_vertical_response(np.ascontiguousarray(gray.T)), threshold, True)
    return (EdgeMap(np.ascontiguousarray(eh.T), "horizontal", np.ascontiguousarray(oh.T)),
            EdgeMap(ev, "vertical", ov))


@dataclass
class PathGraph:
    """Chain of edge pixels with one pixel per row (vertical) or column (horizontal).

    ``xs``/``ys`` are integer pixel indices ordered along the primary axis.
    """

    orientation: str
    xs: np.ndarray
    ys: np.ndarray
    index: int = -1
    offsets: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.xs)

    @property
    def pixels(self) -> list[Point2]:
        return [Point2(int(x), int(y)) for x, y in zip(self.xs, self.ys)]

    def centers(self) -> np.ndarray:
        """Pixel centres as an (N, 2) float array."""
        return np.stack([self.xs + 0.5, self.ys + 0.5], axis=1).astype(np.float64)

    def subpixel(self) -> np.ndarray:
        """Pixel centres moved across the chain by the edge's sub-pixel offset."""
        c = self.centers()
        if self.offsets is not None:
            c[:, 0 if self.orientation == "vertical" else 1] += self.offsets
        return c


class PathGraphSet:
    """All path graphs of one edge map, with a label raster for fast lookup."""

    def __init__(self, em: EdgeMap):
        mask = (em.data > 0).astype(np.uint8)
        vertical = em.orientation == "vertical"
        if vertical:
            labels, count = link_rows(mask)
        else:
            labels, count = link_rows(np.ascontiguousarray(mask.T))
            labels = np.ascontiguousarray(labels.T)
        self.orientation = em.orientation
        self.labels = labels
        self.count = int(count)
        ys, xs = np.nonzero(labels >= 0)
        lab = labels[ys, xs]
        if not vertical:
            # primary axis is x: order pixels by column
            o = np.lexsort((ys, xs))
            ys, xs, lab = ys[o], xs[o], lab[o]
        order = np.argsort(lab, kind="stable")
        self._xs = xs[order].astype(np.int32)
        self._ys = ys[order].astype(np.int32)
        self._off = None if em.offset is None else em.offset[self._ys, self._xs].astype(np.float64)
        self.lengths = np.bincount(lab, minlength=self.count).astype(np.int64)
        self.starts = np.concatenate([[0], np.cumsum(self.lengths)[:-1]]).astype(np.int64)
        self._cache: dict[int, PathGraph] = {}

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, i: int) -> PathGraph:
        g = self._cache.get(i)
        if g is None:
            a = self.starts[i]
            b = a + self.lengths[i]
            off = None if self._off is None else self._off[a:b]
            g = PathGraph(self.orientation, self._xs[a:b], self._ys[a:b], int(i), off)
            self._cache[i] = g
        return g

    def __iter__(self):
        return (self[i] for i in range(self.count))

    def longer_than(self, n: int) -> np.ndarray:
        return np.nonzero(self.lengths >= n)[0]


def path_graphs(em: EdgeMap) -> list[PathGraph]:
    """Decompose the non-zero pixels of ``em`` into path graphs.

    Every non-zero pixel ends up in exactly one chain; isolated pixels form
    chains of length one.
    """
    return list(PathGraphSet(em))


def gaussian_kernel(sigma: float) -> np.ndarray:
    r = int(math.ceil(3 * sigma))
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def smooth(em: EdgeMap, sigma: float) -> EdgeMap:
    """Separable Gaussian blur (radius ceil(3 sigma), replicated border)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    k = gaussian_kernel(sigma)
    out = cv2.sepFilter2D(em.data.astype(np.float32), cv2.CV_32F, k, k, borderType=cv2.BORDER_REPLICATE)
    return EdgeMap(out, em.orientation)
