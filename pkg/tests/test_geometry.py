from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from foldrect.geometry import (BL, BR, CL, CR, TL, TR, GeometryError, Hexangle, Homography, Line2, Quadrilateral,
                               Segment2, apply_V, aspect_ratio, concurrency_defect, fit_concurrent_lines,
                               hexangle_homographies, homography_from_quad, intersect, is_concurrent)


def test_line_normalized():
    ln = Line2(0, 2, -4)
    assert (ln.a, ln.b, ln.c) == (0.0, 1.0, -2.0)
    with pytest.raises(GeometryError):
        Line2(0, 0, 1)


def test_intersect_axes():
    p = intersect(Line2(1, 0, 0), Line2(0, 1, 0))
    assert p.w != 0
    assert p.to_point() == pytest.approx((0.0, 0.0))


def test_intersect_parallel_is_ideal():
    p = intersect(Line2(0, 1, 0), Line2(0, 1, -1))
    assert p.w == 0
    assert abs(p.u) > 0 and p.v == 0


def test_intersect_solves_linear_system():
    # y = 2x and y = -x + 3; oracle: numpy solve of the 2x2 system
    l1, l2 = Line2(2, -1, 0), Line2(1, 1, -3)
    ref = np.linalg.solve([[2, -1], [1, 1]], [0, 3])
    assert intersect(l1, l2).to_point() == pytest.approx(tuple(ref), abs=1e-12)
    assert tuple(ref) == pytest.approx((1.0, 2.0))


def test_intersect_coincident_raises():
    with pytest.raises(GeometryError, match="coincident"):
        intersect(Line2(0, 1, -1), Line2(0, 2, -2))


def test_homography_identity_and_scale():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert np.allclose(homography_from_quad(sq, sq).m, np.eye(3), atol=1e-12)
    big = [(0, 0), (2, 0), (2, 2), (0, 2)]
    assert np.allclose(homography_from_quad(sq, big).m, np.diag([2, 2, 1]), atol=1e-12)


def test_homography_trapezoid_resubstitution():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    trap = [(0, 0), (1, 0), (0.8, 1), (0.2, 1)]
    h = homography_from_quad(sq, trap)
    assert np.abs(h.m[2, :2]).max() > 1e-6
    assert np.abs(h.apply(np.array(sq, float)) - np.array(trap)).max() < 1e-8


def test_homography_degenerate():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    with pytest.raises(GeometryError, match="degenerate quad pair"):
        homography_from_quad(sq, [(0, 0), (1, 0), (2, 0), (3, 0)])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-40, 40), min_size=8, max_size=8))
def test_homography_maps_corners(jit):
    dst = np.array([[100, 100], [400, 100], [400, 400], [100, 400]], float) + np.reshape(jit, (4, 2))
    src = [(0, 0), (2100, 0), (2100, 1485), (0, 1485)]
    h = homography_from_quad(src, dst)
    assert np.abs(h.apply(np.array(src, float)) - dst).max() < 1e-8


def test_concurrency_defect_examples():
    assert concurrency_defect(Line2(0, 1, 0), Line2(1, -1, 0), Line2(1, 0, 0)) == pytest.approx(0, abs=1e-15)
    assert concurrency_defect(Line2(0, 1, 0), Line2(0, 1, -1), Line2(0, 1, -2)) == pytest.approx(0, abs=1e-15)
    # y=0, x=0, y=x+1: rows (0,1,0), (1,0,0), (1,-1,1)/sqrt(2) in normal form; |det| = 1/sqrt(2),
    # and 1 for the raw coefficient rows
    raw = abs(np.linalg.det(np.array([[0, 1, 0], [1, 0, 0], [1, -1, 1.0]])))
    assert raw == pytest.approx(1.0)
    d = concurrency_defect(Line2(0, 1, 0), Line2(1, 0, 0), Line2(1, -1, 1))
    assert d == pytest.approx(raw / math.sqrt(2.0))
    # x=0 and x=3 meet at infinity, which y=0 misses: the defect is their separation
    assert concurrency_defect(Line2(0, 1, 0), Line2(1, 0, 0), Line2(1, 0, -3)) == pytest.approx(3.0)
    with pytest.raises(GeometryError):
        concurrency_defect(np.array([0.0, 0.0, 1.0]), Line2(0, 1, 0), Line2(1, 0, 0))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10), st.permutations([0, 1, 2]))
def test_concurrency_defect_invariances(s1, s2, s3, perm):
    ls = [np.array([0.2, 1.0, -3.0]), np.array([0.5, -1.0, 2.0]), np.array([1.0, 0.1, 0.3])]
    base = concurrency_defect(*ls)
    scaled = concurrency_defect(ls[0] * s1, ls[1] * s2, ls[2] * s3)
    permuted = concurrency_defect(*[ls[i] for i in perm])
    assert scaled == pytest.approx(base, rel=1e-12)
    assert permuted == pytest.approx(base, rel=1e-12)


def _residual(segs, lines):
    return sum(ln.distance(p) ** 2 for s, ln in zip(segs, lines) for p in s)


def _oracle_residual(segs):
    """Best pencil residual: minimize over the vertex, optimal line per segment in closed form."""
    pts = [np.array(s, float) for s in segs]

    def cost_at(v):
        tot = 0.0
        for s in pts:
            d = s - v
            # best line through v: normal = smallest eigenvector of the scatter about v
            tot += np.linalg.eigvalsh(d.T @ d)[0]
        return tot

    def cost_inf(theta):
        n = np.array([-math.sin(theta), math.cos(theta)])
        tot = 0.0
        for s in pts:
            o = s @ n
            tot += ((o - o.mean()) ** 2).sum()
        return tot

    best = min(cost_inf(t) for t in np.linspace(-0.2, 0.2, 4001))
    for x0 in (-5000, -500, 0, 500, 5000, 50000):
        for y0 in (-500, 0, 500):
            r = minimize(lambda v: cost_at(v), [x0, y0], method="Nelder-Mead",
                         options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 20000})
            best = min(best, r.fun)
    return best


def test_fit_concurrent_exact_input():
    segs = [((0, 0), (100, 10)), ((0, 50), (100, 50)), ((0, 100), (100, 90))]   # meet at x = 500
    v, lines = fit_concurrent_lines(segs)
    assert _residual(segs, lines) < 1e-16
    assert concurrency_defect(*lines) < 1e-10


def test_fit_concurrent_parallel():
    segs = [((0, 0), (100, 0)), ((0, 50), (100, 50)), ((0, 100), (100, 100))]
    v, lines = fit_concurrent_lines(segs)
    assert abs(v.w) < 1e-12
    assert _residual(segs, lines) < 1e-16


def test_fit_concurrent_matches_search_oracle():
    f = [lambda x: 0.0 * x, lambda x: 0.01 * x + 1, lambda x: -0.01 * x + 2]
    segs = [((0, g(0)), (100, g(100))) for g in f]
    _, lines = fit_concurrent_lines(segs)
    got = _residual(segs, lines)
    ref = _oracle_residual(segs)
    assert concurrency_defect(*lines) < 1e-10
    assert got <= ref + 1e-9
    assert got == pytest.approx(ref, rel=1e-4, abs=1e-9)


def test_fit_concurrent_direction_and_degenerate():
    segs = [((100, 0), (0, 1)), ((0, 50), (100, 52)), ((100, 100), (0, 99))]
    _, lines = fit_concurrent_lines(segs)
    for s, ln in zip(segs, lines):
        assert ln.direction @ np.subtract(s[1], s[0]) > 0
    with pytest.raises(GeometryError, match="collapsed"):
        fit_concurrent_lines([((0, 0), (1, 0)), ((2, 0), (3, 0)), ((4, 0), (5, 0))])


def _hex(tl, tr, cr, br, bl, cl):
    return Hexangle(np.array([tl, tr, cr, br, bl, cl], float))


def test_apply_V_fixed_points():
    rect = _hex((10, 10), (110, 10), (110, 80), (110, 150), (10, 150), (10, 80))
    out = apply_V(rect)
    assert np.abs(out.vertices - rect.vertices).max() < 1e-8
    # already concurrent pencil through (1000, 80)
    conc = _hex((0, 0), (100, 8), (100, 80), (100, 152), (0, 160), (0, 80))
    assert concurrency_defect(*conc.horizontal_lines()) < 1e-12
    assert np.abs(apply_V(conc).vertices - conc.vertices).max() < 1e-8


def test_apply_V_rotated_crease():
    h = _hex((0, 0), (200, 0), (200, 100 + 100 * math.tan(math.radians(1))), (200, 200), (0, 200), (0, 100))
    out = apply_V(h)
    assert concurrency_defect(*out.horizontal_lines()) < 1e-10
    assert np.abs(out.vertices[[CL, CR]] - h.vertices[[CL, CR]]).max() > 1e-3
    # idempotent
    assert np.abs(apply_V(out).vertices - out.vertices).max() < 1e-6


def _random_concurrent_hexangle(rng):
    vx = 350 + rng.choice([-1, 1]) * rng.uniform(3000, 1e5)
    vy = rng.uniform(300, 500)
    xl, xr = 100 + rng.uniform(-20, 20), 600 + rng.uniform(-20, 20)

    def on(y_at_left):
        slope = (vy - y_at_left) / (vx - xl)
        return (xl, y_at_left), (xr, y_at_left + slope * (xr - xl))

    (tl, tr), (cl, cr), (bl, br) = on(100 + rng.uniform(-30, 30)), on(400 + rng.uniform(-30, 30)), \
        on(700 + rng.uniform(-30, 30))
    return _hex(tl, tr, cr, br, bl, cl)


def test_halves_agree_on_crease_after_correction():
    rng = np.random.default_rng(5)
    for _ in range(50):
        h = _random_concurrent_hexangle(rng)
        pert = Hexangle.from_points(h.vertices + rng.normal(0, 2, (6, 2)))
        hc = apply_V(pert)
        up, lo = hexangle_homographies(hc, 2100, 2970)
        x = rng.uniform(0, 2100, 100)
        pts = np.stack([x, np.full(100, 1485.0)], axis=1)
        assert np.abs(up.apply(pts) - lo.apply(pts)).max() < 1e-6


def test_aspect_ratio_fronto_parallel():
    q = [(300, 400), (700, 400), (700, 600), (300, 600)]
    for f in (100.0, 705.0, 1e5):
        assert aspect_ratio(q, f, (500, 500)) == pytest.approx(2.0, abs=1e-12)
    c, s = math.cos(math.radians(30)), math.sin(math.radians(30))
    sq = [(500 + 100 * (x * c - y * s), 500 + 100 * (x * s + y * c)) for x, y in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
    assert aspect_ratio(sq, 700.0, (500, 500)) == pytest.approx(1.0, abs=1e-12)


def test_aspect_ratio_pinhole_projection():
    # forward-project a 297 x 210 rectangle through a pinhole camera with focal 0.705 * width
    w, hgt = 1000, 1400
    f = 0.705 * w
    K = np.array([[f, 0, w / 2], [0, f, hgt / 2], [0, 0, 1.0]])
    ax, ay = math.radians(20), math.radians(-15)
    R = np.array([[1, 0, 0], [0, math.cos(ax), -math.sin(ax)], [0, math.sin(ax), math.cos(ax)]]) @ \
        np.array([[math.cos(ay), 0, math.sin(ay)], [0, 1, 0], [-math.sin(ay), 0, math.cos(ay)]])
    corners = np.array([[-148.5, -105, 0], [148.5, -105, 0], [148.5, 105, 0], [-148.5, 105, 0]])
    cam = corners @ R.T + np.array([20, -10, 600.0])
    img = cam @ K.T
    q = img[:, :2] / img[:, 2:]
    assert aspect_ratio(q, f, (w / 2, hgt / 2)) == pytest.approx(297 / 210, abs=1e-3)


def test_aspect_ratio_errors():
    with pytest.raises(ValueError):
        aspect_ratio([(0, 0), (1, 0), (1, 1), (0, 1)], 0.0, (0, 0))


def test_quadrilateral_and_hexangle_invariants():
    with pytest.raises(GeometryError):
        Quadrilateral([(0, 0), (0, 1), (1, 1), (1, 0)])       # counter-clockwise on screen
    with pytest.raises(GeometryError):
        _hex((0, 0), (10, 0), (10, 5), (10, 10), (0, 10), (0, -1))   # crease vertex above the top: collapsed
    with pytest.raises(GeometryError, match="off the crease"):
        Hexangle(np.array([(0, 0), (10, 0), (10, 5), (10, 10), (0, 10), (0, 5)], float), Line2(0, 1, -6))
    h = _hex((0, 0), (10, 0), (10, 5), (10, 10), (0, 10), (0, 5))
    assert h.upper.vertices.tolist() == [[0, 0], [10, 0], [10, 5], [0, 5]]
    assert h.crease_line.distance(h[CL]) < 1e-12


def test_is_concurrent_tau():
    assert is_concurrent(Line2(0, 1, 0), Line2(0, 1, -1), Line2(0, 1, -2))
    assert not is_concurrent(Line2(0, 1, 0), Line2(1, 0, 0), Line2(1, -1, 1))


def test_homography_inverse_and_segment():
    h = Homography(np.array([[1.2, 0.1, 3], [0.05, 0.9, -2], [1e-4, 2e-4, 1]]))
    p = np.array([[10.0, 20.0], [300.0, -5.0]])
    assert np.abs(h.inverse().apply(h.apply(p)) - p).max() < 1e-9
    s = Segment2((0, 0), (3, 4))
    assert s.length == 5.0 and s.distance((0, 5)) == pytest.approx(math.dist((0, 5), (0, 0)) * 0.6)
