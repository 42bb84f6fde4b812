"""Debug dumps: edge maps, Hough accumulators, overlays and a score ledger."""
from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from .hough import accumulator_image, fht
from .imaging import save_image


def _to_u8(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    m = a.max() if a.size else 0.0
    if m <= 0:
        return np.zeros(a.shape, dtype=np.uint8)
    return np.clip(255.0 * a / m, 0, 255).astype(np.uint8)


def _poly(img, pts, color, closed=True, thick=1):
    p = np.round(np.asarray(pts, dtype=np.float64) - 0.5).astype(np.int32).reshape(-1, 1, 2)
    cv2.polylines(img, [p], closed, color, thick, cv2.LINE_AA)


def _line(img, line, color):
    h, w = img.shape[:2]
    if abs(line.b) > abs(line.a):
        a, b = (0.0, line.y_at(0.0)), (float(w), line.y_at(float(w)))
    else:
        a, b = (line.x_at(0.0), 0.0), (line.x_at(float(h)), float(h))
    _poly(img, [a, b], color, closed=False)


def overlay(loc) -> np.ndarray:
    """Working-resolution RGB overlay of lines, best quads and the hexangle."""
    g = loc.gray
    img = np.repeat(g[:, :, None], 3, axis=2).copy()
    for key, val in loc.lines.items():
        if key == "crease":
            for ln in val:
                _line(img, ln.line, (255, 120, 0))
            continue
        lh, lv = val
        for ln in lh:
            _line(img, ln.line, (0, 120, 255))
        for ln in lv:
            _line(img, ln.line, (0, 200, 200))
    for qs in loc.quads.values():
        if qs:
            _poly(img, qs[0].vertices, (255, 200, 0))
    if loc.selection.original is not None:
        _poly(img, loc.selection.original.vertices, (255, 0, 255))
    if loc.hexangle is not None:
        v = loc.hexangle.vertices
        _poly(img, v, (255, 0, 0), thick=2)
        _poly(img, v[[5, 2]], (255, 0, 0), closed=False, thick=2)
    return img


def dump_debug(debug_dir, loc, result) -> Path:
    """Write intermediate products of one run into ``debug_dir``."""
    d = Path(debug_dir)
    d.mkdir(parents=True, exist_ok=True)
    eh, ev = loc.edges
    save_image(d / "edges_h.png", _to_u8(eh.data))
    save_image(d / "edges_v.png", _to_u8(ev.data))
    sh, sv = loc.smoothed
    save_image(d / "smooth_h.png", _to_u8(sh.data))
    save_image(d / "smooth_v.png", _to_u8(sv.data))
    hgt = loc.gray.shape[0]
    mid = hgt // 2
    for half, (r0, r1) in (("top", (0, mid)), ("bottom", (mid, hgt))):
        for fam, em in (("horizontal", eh), ("vertical", ev)):
            acc = fht((em.data[r0:r1] > 0).astype(np.uint8), fam, (0.0, float(r0)))
            save_image(d / f"hough_{half}_{fam}.png", _to_u8(accumulator_image(acc)))
    save_image(d / "overlay.png", overlay(loc))
    lines = [f"status: {result.status}"]
    lines += [f"timing {k}: {v:.2f} ms" for k, v in result.timings.items()]
    lines += [f"note: {n}" for n in loc.notes]
    sel = loc.selection
    for i, a in enumerate(loc.alternatives):
        sc = sel.scores[i] if i < len(sel.scores) else float("nan")
        lines.append(f"alt {i:4d} {a.kind} score={sc:.4f}")
    for i, why in sel.tried:
        lines.append(f"tried {i}: {why}")
    lines.append(f"chosen: {sel.chosen}  rejected: {sel.rejected or '-'}")
    (d / "ledger.txt").write_text("\n".join(lines) + "\n")
    return d
