from __future__ import annotations

import math

import numpy as np
import pytest

from foldrect.geometry import Line2
from foldrect.hough import LineH, brightest_near, fht, naive_fht, pattern_offsets, top_lines

from oracles import dyadic_pattern, oracle_accumulator, oracle_accumulator_vec


def test_pattern_definition():
    for n in (1, 2, 4, 16, 64):
        for s in range(n):
            off = pattern_offsets(n, s)
            assert off.tolist() == dyadic_pattern(n, s)
            assert off[0] == 0 and off[-1] == s
            assert np.all(np.diff(off) >= 0) and np.all(np.diff(off) <= 1)


@pytest.mark.parametrize("shape,family", [((13, 9), "horizontal"), ((16, 16), "vertical"), ((7, 20), "vertical"),
                                          ((32, 32), "horizontal")])
def test_fht_matches_oracle(shape, family):
    rng = np.random.default_rng(sum(shape))
    data = rng.integers(0, 4, shape).astype(np.uint8)
    acc = fht(data, family).acc
    assert np.array_equal(acc.astype(np.int64), oracle_accumulator(data, family))
    assert np.array_equal(naive_fht(data, family).astype(np.int64), oracle_accumulator(data, family))


def test_vectorized_oracle_agrees_with_loop_oracle():
    rng = np.random.default_rng(3)
    for shape in ((5, 11), (16, 9), (12, 12)):
        data = rng.integers(0, 9, shape)
        for fam in ("horizontal", "vertical"):
            assert np.array_equal(oracle_accumulator_vec(data, fam), oracle_accumulator(data, fam))


def test_fht_blank_and_linearity():
    assert not fht(np.zeros((20, 30), np.uint8), "horizontal").acc.any()
    rng = np.random.default_rng(7)
    data = rng.integers(0, 5, (24, 40)).astype(np.int32)
    a = fht(data, "horizontal").acc.astype(np.int64)
    b = fht(3 * data, "horizontal").acc.astype(np.int64)
    assert np.array_equal(3 * a, b)


def test_single_pattern_line_is_strict_max():
    n = 32
    s = 11
    data = np.zeros((40, n), np.uint8)
    off = dyadic_pattern(n, s)
    for x in range(n):
        data[5 + off[x], x] = 1
    acc = fht(data, "horizontal").acc
    assert acc[0, s, 5] == n
    assert (acc == n).sum() == 1


def _draw_line(shape, p0, p1, val=1):
    img = np.zeros(shape, np.uint8)
    n = int(max(abs(p1[0] - p0[0]), abs(p1[1] - p0[1]))) * 2 + 1
    for t in np.linspace(0, 1, n):
        x = p0[0] + t * (p1[0] - p0[0])
        y = p0[1] + t * (p1[1] - p0[1])
        img[int(y), int(x)] = val
    return img


def test_top_lines_one_line():
    img = _draw_line((100, 128), (0, 30.5), (127.9, 50.5))
    lines = top_lines(fht(img, "horizontal"), 3, 4)
    truth = Line2.through((0, 30.5), (127.9, 50.5))
    best = lines[0].line
    assert abs(best.angle_deg() - truth.angle_deg()) < 1.0
    for x in (0.5, 64, 127.5):
        assert abs(best.y_at(x) - truth.y_at(x)) < 1.0


def test_top_lines_blank_and_separated():
    assert top_lines(fht(np.zeros((30, 30), np.uint8), "vertical"), 5, 4) == []
    img = _draw_line((100, 128), (0, 30.5), (127.9, 30.5)) | _draw_line((100, 128), (0, 43.5), (127.9, 43.5))
    lines = top_lines(fht(img, "horizontal"), 2, 4)
    ys = sorted(math.floor(ln.line.y_at(64)) for ln in lines)
    assert ys == [30, 43]
    # pairwise separation in the suppression space
    many = top_lines(fht(img, "horizontal"), 12, 4)
    for i, a in enumerate(many):
        for b in many[i + 1:]:
            assert max(abs(a.key[0] - b.key[0]), abs(a.key[1] - b.key[1])) > 4


def _lh(y, brightness):
    return LineH(Line2(0, 1, -y), brightness, "horizontal")


def test_brightest_near():
    assert brightest_near([], (0, 0), 15) is None
    near, far = _lh(3, 1.0), _lh(30, 100.0)
    assert brightest_near([near, far], (0, 0), 15) is near
    a, b = _lh(5, 10.0), _lh(-7, 20.0)
    assert brightest_near([a, b], (0, 0), 15) is b


def test_family_angles():
    img = _draw_line((128, 100), (30.5, 0), (50.5, 127.9))
    ln = top_lines(fht(img, "vertical"), 1, 4)[0].line
    assert abs(ln.angle_deg()) > 45
    assert math.isclose(abs(ln.angle_deg()), abs(Line2.through((30.5, 0), (50.5, 127.9)).angle_deg()), abs_tol=1)
