"""Rectification quality metrics: MS-SSIM, edit distance, character error rate."""
from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np
from numba import njit

# standard five-scale weights
MS_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
WINDOW = 11
WINDOW_SIGMA = 1.5
DYNAMIC_RANGE = 255.0
K1, K2 = 0.01, 0.03
MIN_SIDE = WINDOW * 2 ** (len(MS_WEIGHTS) - 1)  # 176


class MetricError(ValueError):
    """Raised for inputs a metric is not defined on."""


@dataclass(frozen=True)
class MetricsRow:
    """SS = 1 - MS-SSIM, edit distance and CER of one rectified image.

    ``ed``/``cer`` are None when OCR was unavailable, ``cer`` also when the
    reference text is empty.
    """

    ss: float
    ed: int | None = None
    cer: float | None = None


# ---------------------------------------------------------------------------
# MS-SSIM

def _filter_valid(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    r = len(k) // 2
    y = cv2.sepFilter2D(x, cv2.CV_64F, k, k, borderType=cv2.BORDER_REFLECT)
    return y[r:-r, r:-r]


def _ssim_cs(a: np.ndarray, b: np.ndarray, k: np.ndarray) -> tuple[float, float]:
    c1 = (K1 * DYNAMIC_RANGE) ** 2
    c2 = (K2 * DYNAMIC_RANGE) ** 2
    mu_a = _filter_valid(a, k)
    mu_b = _filter_valid(b, k)
    saa = _filter_valid(a * a, k) - mu_a * mu_a
    sbb = _filter_valid(b * b, k) - mu_b * mu_b
    sab = _filter_valid(a * b, k) - mu_a * mu_b
    cs_map = (2 * sab + c2) / (saa + sbb + c2)
    l_map = (2 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1)
    return float(np.mean(l_map * cs_map)), float(np.mean(cs_map))


def _halve(x: np.ndarray) -> np.ndarray:
    h, w = (x.shape[0] // 2) * 2, (x.shape[1] // 2) * 2
    x = x[:h, :w]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def _as_gray64(img: np.ndarray) -> np.ndarray:
    a = np.asarray(img)
    if a.ndim == 3:
        a = cv2.cvtColor(a.astype(np.float32) if a.dtype != np.uint8 else a,
                         cv2.COLOR_RGB2GRAY if a.shape[2] == 3 else cv2.COLOR_RGBA2GRAY)
    if a.ndim != 2:
        raise MetricError("ms_ssim expects grayscale images")
    return a.astype(np.float64)


def ms_ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Five-scale MS-SSIM of two equally sized grayscale images in [0, 255].

    Gaussian window 11x11 with sigma 1.5 (valid region only), 2x2 average
    down-sampling between scales.  Per-scale contrast-structure terms (and
    the final SSIM) are clamped at zero before the weighted product so the
    result lies in [0, 1].
    """
    x, y = _as_gray64(a), _as_gray64(b)
    if x.shape != y.shape:
        raise MetricError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if min(x.shape) < MIN_SIDE:
        raise MetricError(f"images must be at least {MIN_SIDE} px on each side")
    k1 = cv2.getGaussianKernel(WINDOW, WINDOW_SIGMA, cv2.CV_64F).ravel()
    out = 1.0
    n = len(MS_WEIGHTS)
    for i, w in enumerate(MS_WEIGHTS):
        ssim, cs = _ssim_cs(x, y, k1)
        term = ssim if i == n - 1 else cs
        out *= max(term, 0.0) ** w
        if i < n - 1:
            x, y = _halve(x), _halve(y)
    return float(min(max(out, 0.0), 1.0))


def structural_dissimilarity(a: np.ndarray, b: np.ndarray) -> float:
    """SS = 1 - MS-SSIM."""
    return 1.0 - ms_ssim(a, b)


# ---------------------------------------------------------------------------
# edit distance

@njit(cache=True, nogil=True)
def _lev_dp(a, b):
    n, m = a.shape[0], b.shape[0]
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=prev.dtype)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            d = prev[j] + 1
            ins = cur[j - 1] + 1
            if d < sub:
                sub = d
            if ins < sub:
                sub = ins
            cur[j] = sub
        prev, cur = cur, prev
    return prev[m]


def _codepoints(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute distance over Unicode scalar values."""
    if a == b:
        return 0
    if not a or not b:
        return max(len(a), len(b))
    return int(_lev_dp(_codepoints(a), _codepoints(b)))


def cer(reference: str, hypothesis: str) -> float | None:
    """Edit distance divided by the reference length (None for an empty reference)."""
    if not reference:
        return None
    return levenshtein(reference, hypothesis) / len(reference)
