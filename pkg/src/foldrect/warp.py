"""Projective rectification of the two page halves onto the output canvas."""
from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .geometry import GeometryError, Hexangle, Homography, hexangle_homographies


class RectificationError(RuntimeError):
    """The hexangle cannot be mapped (degenerate half)."""


@dataclass
class RectifiedOutput:
    image: np.ndarray
    hexangle: Hexangle
    homographies: tuple[Homography, Homography]  # canvas -> source, upper and lower half


def _index_matrix(h: Homography, row_offset: float) -> np.ndarray:
    """Homography between pixel *indices* of a canvas block and of the source.

    ``h`` maps continuous canvas coordinates to continuous source
    coordinates; pixel (i, j) of the block sits at (j + 0.5, i + 0.5 +
    row_offset) on the canvas, and source index = continuous - 0.5.
    """
    pre = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 0.5 + row_offset], [0.0, 0.0, 1.0]])
    post = np.array([[1.0, 0.0, -0.5], [0.0, 1.0, -0.5], [0.0, 0.0, 1.0]])
    return post @ h.m @ pre


def rectify(img: np.ndarray, h: Hexangle, p) -> RectifiedOutput:
    """Warp the upper and lower quads of ``h`` onto the two canvas halves.

    Every output pixel centre is mapped back into the source and sampled
    bilinearly; samples falling outside the source take the nearest edge
    pixel.
    """
    out_w, out_h = int(p.out_w), int(p.out_h)
    half = out_h // 2
    try:
        h_up, h_lo = hexangle_homographies(h, out_w, out_h)
    except GeometryError as exc:
        raise RectificationError("rectification failed") from exc
    shape = (out_h, out_w) + img.shape[2:]
    canvas = np.empty(shape, dtype=img.dtype)
    flags = cv2.INTER_LINEAR | cv2.WARP_INVERSE_MAP
    for hm, r0, r1 in ((h_up, 0, half), (h_lo, half, out_h)):
        m = _index_matrix(hm, r0)
        block = canvas[r0:r1]
        res = cv2.warpPerspective(img, m, (out_w, r1 - r0), dst=block, flags=flags,
                                  borderMode=cv2.BORDER_REPLICATE)
        if res is not block and not np.shares_memory(res, block):
            block[...] = res
    return RectifiedOutput(canvas, h, (h_up, h_lo))


def seam_tear(h_up: Homography, h_lo: Homography, out_w: float, out_h: float, columns: int = 200) -> np.ndarray:
    """Source-space distance between the two half maps on the canvas mid-line.

    Evaluated at ``columns`` pixel-centre abscissae; zero for a hexangle that
    satisfies the continuity criterion.
    """
    x = (np.linspace(0, out_w - 1, columns).round() + 0.5)
    pts = np.stack([x, np.full_like(x, out_h / 2.0)], axis=1)
    return np.hypot(*(h_up.apply(pts) - h_lo.apply(pts)).T)


def seam_jump(h_up: Homography, h_lo: Homography, out_w: float, out_h: float, columns: int = 200) -> np.ndarray:
    """Excess source-coordinate jump between output pixels straddling the mid-line.

    For each sampled column, the source distance between the last pixel of
    the upper half and the first of the lower half, minus the mean of the
    neighbouring within-half steps (the ordinary sampling pitch).  A torn
    seam shows up as a positive excess; a continuous one stays near zero
    regardless of how many source pixels one output pixel spans.
    """
    hh = out_h / 2.0
    x = (np.linspace(0, out_w - 1, columns).round() + 0.5)

    def at(hm, y):
        return hm.apply(np.stack([x, np.full_like(x, y)], axis=1))

    a2, a1 = at(h_up, hh - 1.5), at(h_up, hh - 0.5)
    b1, b2 = at(h_lo, hh + 0.5), at(h_lo, hh + 1.5)
    across = np.hypot(*(b1 - a1).T)
    pitch = 0.5 * (np.hypot(*(a1 - a2).T) + np.hypot(*(b2 - b1).T))
    return np.abs(across - pitch)


def seam_metric(h_up: Homography, h_lo: Homography, out_w: float, out_h: float, columns: int = 200) -> float:
    """Worst tearing over sampled columns (max of mid-line tear and straddle excess)."""
    return float(max(seam_tear(h_up, h_lo, out_w, out_h, columns).max(),
                     seam_jump(h_up, h_lo, out_w, out_h, columns).max()))
