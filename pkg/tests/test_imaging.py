from __future__ import annotations

import numpy as np
import pytest
from scipy import ndimage

from foldrect import synth
from foldrect.imaging import (EdgeMap, ImageError, extract_edges, gaussian_kernel, load_image, otsu_threshold,
                              path_graphs, save_image, smooth, to_grayscale, to_working)


def test_grayscale_examples():
    white = np.full((4, 4, 3), 255, np.uint8)
    red = np.zeros((4, 4, 3), np.uint8)
    red[..., 0] = 255
    assert (to_grayscale(white) == 255).all()
    assert (to_grayscale(red) == round(0.299 * 255)).all()
    g = np.arange(16, dtype=np.uint8).reshape(4, 4)
    assert to_grayscale(g) is g


def test_edges_constant_and_step():
    assert all(e.nonzero_count() == 0 for e in extract_edges(np.full((64, 64), 90, np.uint8)))
    img = np.zeros((64, 64), np.uint8)
    img[:, 30:] = 200
    eh, ev = extract_edges(img)
    assert eh.nonzero_count() == 0
    cols = np.unique(np.nonzero(ev.data)[1])
    assert cols.tolist() == [30]
    assert np.count_nonzero(ev.data[:, 30]) == 64


def test_edges_too_small():
    with pytest.raises(ImageError, match="too small"):
        extract_edges(np.zeros((10, 40), np.uint8))


def test_edges_shift_invariant():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 200, (80, 90)).astype(np.uint8)
    a = extract_edges(img)
    b = extract_edges(img + np.uint8(40))
    for x, y in zip(a, b):
        assert np.array_equal(x.data, y.data)


def test_edges_one_pixel_per_row():
    rng = np.random.default_rng(2)
    img = (ndimage.gaussian_filter(rng.random((120, 100)), 2) * 255).astype(np.uint8)
    eh, ev = extract_edges(img)
    # the vertical map has isolated maxima along each row, the horizontal one along each column
    v = ev.data > 0
    h = eh.data > 0
    assert not (v[:, 1:] & v[:, :-1]).any()
    assert not (h[1:] & h[:-1]).any()


def test_edges_cover_synthetic_boundary():
    img, gt = synth.generate(synth.random_spec(3))
    small, (sx, sy) = to_working(img, 640)
    eh, ev = extract_edges(to_grayscale(small))
    v = gt.hexangle.vertices * np.array([sx, sy])
    for (i, j, em) in ((0, 1, eh), (1, 2, ev), (2, 3, ev), (4, 3, eh), (5, 4, ev), (0, 5, ev)):
        p0, p1 = v[i], v[j]
        n = int(np.hypot(*(p1 - p0)))
        t = np.linspace(0.05, 0.95, n)
        pts = p0 + t[:, None] * (p1 - p0)
        mask = ndimage.binary_dilation(em.data > 0, iterations=2)
        hit = mask[np.clip(pts[:, 1].astype(int), 0, mask.shape[0] - 1), np.clip(pts[:, 0].astype(int), 0,
                                                                               mask.shape[1] - 1)]
        assert hit.mean() >= 0.5


def _flood_count(mask):
    return ndimage.label(mask, structure=np.ones((3, 3)))[1]


def test_path_graphs_basic():
    assert path_graphs(EdgeMap(np.zeros((20, 20), np.float32), "vertical")) == []
    m = np.zeros((120, 20), np.float32)
    m[10:110, 7] = 1
    gs = path_graphs(EdgeMap(m, "vertical"))
    assert len(gs) == 1 and len(gs[0]) == 100
    assert np.all(np.diff(gs[0].ys) == 1)
    m2 = m.copy()
    m2[50:52, 7] = 0
    gs2 = path_graphs(EdgeMap(m2, "vertical"))
    assert len(gs2) == _flood_count(m2 > 0) == 2


def test_path_graphs_partition_random():
    rng = np.random.default_rng(3)
    for orient in ("vertical", "horizontal"):
        m = (rng.random((60, 70)) < 0.08).astype(np.float32)
        gs = path_graphs(EdgeMap(m, orient))
        assert sum(len(g) for g in gs) == int(m.sum())
        seen = set()
        for g in gs:
            prim = g.ys if orient == "vertical" else g.xs
            sec = g.xs if orient == "vertical" else g.ys
            assert np.all(np.diff(prim) == 1)           # one pixel per row/column, consecutive
            assert np.all(np.abs(np.diff(sec)) <= 1)    # 8-connected
            seen |= set(zip(g.xs.tolist(), g.ys.tolist()))
        assert len(seen) == int(m.sum())


def test_smooth_examples():
    const = EdgeMap(np.full((30, 30), 5.0, np.float32), "vertical")
    assert np.allclose(smooth(const, 1.83).data, 5.0, atol=1e-5)
    imp = np.zeros((41, 41), np.float32)
    imp[20, 20] = 1
    out = smooth(EdgeMap(imp, "vertical"), 1.83).data
    # oracle: direct evaluation of the normalized sampled Gaussian
    r = int(np.ceil(3 * 1.83))
    x = np.arange(-r, r + 1)
    k = np.exp(-0.5 * (x / 1.83) ** 2)
    k /= k.sum()
    assert out[20, 20] == pytest.approx(float(k[r] ** 2), rel=1e-5)
    assert out.sum() == pytest.approx(1.0, abs=1e-6)
    assert np.abs(smooth(EdgeMap(imp, "vertical"), 0.1).data - imp).max() < 1e-3
    assert np.allclose(gaussian_kernel(1.83), k)


def test_otsu_bimodal():
    vals = np.concatenate([np.full(100, 10.0), np.full(100, 200.0)])
    t = otsu_threshold(vals)
    assert 10 <= t < 200


def test_io_roundtrip(tmp_path):
    img = np.random.default_rng(0).integers(0, 255, (20, 30, 3)).astype(np.uint8)
    save_image(tmp_path / "a.png", img)
    assert np.array_equal(load_image(tmp_path / "a.png"), img)
    with pytest.raises(ImageError):
        load_image(tmp_path / "missing.png")


def test_to_working_scale():
    img = np.zeros((960, 720, 3), np.uint8)
    small, (sx, sy) = to_working(img, 640)
    assert max(small.shape[:2]) == 640
    assert sx == pytest.approx(small.shape[1] / 720) and sy == pytest.approx(small.shape[0] / 960)
