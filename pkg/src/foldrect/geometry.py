"""Planar projective primitives.

Points, lines, segments, homographies and the two polygon types used by the
localizer (quadrilaterals for page halves and six-vertex "hexangles" for a
page folded in half).  Everything is a small immutable value; points at
infinity are carried homogeneously and never replaced by large numbers.

Image convention: x grows to the right, y grows downwards, the centre of
pixel (row i, column j) is the continuous point (j + 0.5, i + 0.5).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class GeometryError(ValueError):
    """Degenerate configuration for a geometric construction."""


# relative threshold below which a homogeneous w is treated as zero
_W_EPS = 1e-12
# default tolerance of the concurrency predicate (normalized determinant)
TAU_CONC = 1e-9


class Point2(NamedTuple):
    x: float
    y: float

    def __sub__(self, other):  # vector difference, as a numpy array
        return np.array([self.x - other[0], self.y - other[1]])

    def dist(self, other) -> float:
        return math.hypot(self.x - other[0], self.y - other[1])

    def homo(self) -> "HomoPoint":
        return HomoPoint(float(self.x), float(self.y), 1.0)


class HomoPoint(NamedTuple):
    u: float
    v: float
    w: float

    @property
    def at_infinity(self) -> bool:
        return abs(self.w) <= _W_EPS * max(abs(self.u), abs(self.v), abs(self.w))

    def to_point(self) -> Point2:
        if self.at_infinity:
            raise GeometryError("point at infinity has no affine coordinates")
        return Point2(self.u / self.w, self.v / self.w)

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w], dtype=float)


@dataclass(frozen=True)
class Line2:
    """Line ``a*x + b*y + c = 0`` stored with ``a**2 + b**2 == 1``.

    The constructor normalizes its arguments, so ``Line2(0, 2, -4)`` is the
    line ``y = 2``.  The sign is kept as given.
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        n = math.hypot(self.a, self.b)
        if not n > 0 or not math.isfinite(n) or not math.isfinite(self.c):
            raise GeometryError("line needs (a, b) != (0, 0)")
        if abs(n - 1.0) > 1e-15:
            object.__setattr__(self, "a", self.a / n)
            object.__setattr__(self, "b", self.b / n)
            object.__setattr__(self, "c", self.c / n)

    @classmethod
    def through(cls, p, q) -> "Line2":
        """Line through two distinct affine points."""
        a = p[1] - q[1]
        b = q[0] - p[0]
        if a == 0 and b == 0:
            raise GeometryError("line through coincident points")
        return cls(a, b, -(a * p[0] + b * p[1]))

    @classmethod
    def from_array(cls, v) -> "Line2":
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=float)

    def signed_distance(self, p) -> float:
        return self.a * p[0] + self.b * p[1] + self.c

    def distance(self, p) -> float:
        return abs(self.signed_distance(p))

    @property
    def direction(self) -> np.ndarray:
        return np.array([self.b, -self.a])

    def angle_deg(self) -> float:
        """Angle of the line with the x axis, in (-90, 90]."""
        ang = math.degrees(math.atan2(-self.a, self.b))
        if ang <= -90:
            ang += 180
        elif ang > 90:
            ang -= 180
        return ang

    def y_at(self, x: float) -> float:
        if self.b == 0:
            raise GeometryError("vertical line has no y(x)")
        return -(self.a * x + self.c) / self.b

    def x_at(self, y: float) -> float:
        if self.a == 0:
            raise GeometryError("horizontal line has no x(y)")
        return -(self.b * y + self.c) / self.a

    def project(self, p) -> Point2:
        d = self.signed_distance(p)
        return Point2(p[0] - d * self.a, p[1] - d * self.b)


class Segment2(NamedTuple):
    p0: Point2
    p1: Point2

    @property
    def length(self) -> float:
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    @property
    def line(self) -> Line2:
        return Line2.through(self.p0, self.p1)

    @property
    def direction(self) -> np.ndarray:
        d = np.array([self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]], dtype=float)
        n = np.hypot(*d)
        if n == 0:
            raise GeometryError("zero-length segment")
        return d / n

    def point_at(self, t: float) -> Point2:
        return Point2(self.p0[0] + t * (self.p1[0] - self.p0[0]),
                      self.p0[1] + t * (self.p1[1] - self.p0[1]))

    def distance(self, p) -> float:
        return float(segment_distances(np.asarray([p], dtype=float), self)[0])


def segment_distances(pts: np.ndarray, s) -> np.ndarray:
    """Euclidean distances from an (N, 2) array of points to segment ``s``."""
    p0 = np.asarray(s[0], dtype=float)
    d = np.asarray(s[1], dtype=float) - p0
    rel = np.asarray(pts, dtype=float) - p0
    dd = float(d @ d)
    if dd == 0:
        return np.hypot(rel[:, 0], rel[:, 1])
    t = np.clip(rel @ d / dd, 0.0, 1.0)
    diff = rel - t[:, None] * d
    return np.hypot(diff[:, 0], diff[:, 1])


def intersect(l1: Line2, l2: Line2) -> HomoPoint:
    """Intersection of two lines as a homogeneous point (w == 0 if parallel)."""
    u = l1.b * l2.c - l1.c * l2.b
    v = l1.c * l2.a - l1.a * l2.c
    w = l1.a * l2.b - l1.b * l2.a
    scale = max(abs(u), abs(v), abs(w))
    if scale <= 1e-15:
        raise GeometryError("degenerate: coincident lines")
    return HomoPoint(u, v, w)


def intersect_points(l1: Line2, l2: Line2) -> Point2:
    """Affine intersection; raises if the lines are parallel."""
    return intersect(l1, l2).to_point()


def concurrency_defect(l1: Line2, l2: Line2, l3: Line2) -> float:
    """|det| of the 3x3 matrix of normalized line coefficient vectors.

    Zero exactly when the three lines pass through one (possibly ideal)
    point.  Each row is put in the normal form of :class:`Line2`
    (``a^2 + b^2 = 1``), so the value does not depend on how the lines were
    scaled and, for a small displacement, grows with the distance in pixels
    by which the third line misses the meeting point of the other two.
    """
    m = np.empty((3, 3))
    for i, l in enumerate((l1, l2, l3)):
        v = l.as_array() if isinstance(l, Line2) else np.asarray(l, dtype=float)
        n = math.hypot(v[0], v[1])
        if n == 0:
            raise GeometryError("not a line: a = b = 0")
        m[i] = v / n
    return float(abs(np.linalg.det(m)))


def is_concurrent(l1: Line2, l2: Line2, l3: Line2, tau: float = TAU_CONC) -> bool:
    return concurrency_defect(l1, l2, l3) < tau


# ---------------------------------------------------------------------------
# homographies


@dataclass(frozen=True, eq=False)
class Homography:
    """Planar projective map, ``m`` is a 3x3 matrix acting on column vectors."""

    m: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.m, dtype=float).reshape(3, 3)
        if not np.all(np.isfinite(m)):
            raise GeometryError("homography has non-finite entries")
        det = np.linalg.det(m)
        if abs(det) <= 1e-300 or abs(det) <= 1e-14 * np.abs(m).max() ** 3:
            raise GeometryError("singular homography")
        if m[2, 2] != 0:
            m = m / m[2, 2]
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    def __matmul__(self, other: "Homography") -> "Homography":
        return Homography(self.m @ other.m)

    def apply(self, pts) -> np.ndarray:
        """Map an (N, 2) array (or a single point) of affine points."""
        p = np.asarray(pts, dtype=float)
        single = p.ndim == 1
        p = np.atleast_2d(p)
        q = p @ self.m[:, :2].T + self.m[:, 2]
        out = q[:, :2] / q[:, 2:3]
        return out[0] if single else out

    def apply_point(self, p) -> Point2:
        x, y = self.apply(np.asarray(p, dtype=float))
        return Point2(float(x), float(y))

    def apply_line(self, l: Line2) -> Line2:
        """Image of a line: l' ~ m^-T l."""
        return Line2.from_array(np.linalg.solve(self.m.T, l.as_array()))

    def to_list(self) -> list:
        return self.m.tolist()


def _quad_array(q) -> np.ndarray:
    if isinstance(q, Quadrilateral):
        return q.vertices
    return np.asarray(q, dtype=float).reshape(4, 2)


def homography_from_quad(src, dst) -> Homography:
    """Exact 4-point homography mapping the vertices of ``src`` onto ``dst``.

    Both point sets are shifted and scaled to unit size first, the 8x8 direct
    linear system is solved there, and the result is de-normalized.
    """
    s = _quad_array(src)
    d = _quad_array(dst)

    def norm_tf(p):
        c = p.mean(axis=0)
        sc = np.sqrt(((p - c) ** 2).sum(axis=1).mean())
        if sc == 0:
            raise GeometryError("degenerate quad pair")
        return np.array([[1 / sc, 0, -c[0] / sc], [0, 1 / sc, -c[1] / sc], [0, 0, 1.0]])

    ts, td = norm_tf(s), norm_tf(d)
    sn = s @ ts[:2, :2].T + ts[:2, 2]
    dn = d @ td[:2, :2].T + td[:2, 2]
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i in range(4):
        x, y = sn[i]
        u, v = dn[i]
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    if np.linalg.cond(a) > 1e12:
        raise GeometryError("degenerate quad pair")
    h = np.linalg.solve(a, b)
    hn = np.append(h, 1.0).reshape(3, 3)
    m = np.linalg.inv(td) @ hn @ ts
    try:
        return Homography(m)
    except GeometryError as exc:
        raise GeometryError("degenerate quad pair") from exc


# ---------------------------------------------------------------------------
# polygons


def _cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def polygon_area(pts: np.ndarray) -> float:
    """Signed shoelace area; positive for clockwise order in image axes."""
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def is_convex_cw(pts: np.ndarray, eps: float = 1e-9) -> bool:
    """True if ``pts`` is a strictly convex polygon in clockwise (image) order."""
    q = pts.tolist() if isinstance(pts, np.ndarray) else pts
    n = len(q)
    scale = max(1.0, max(abs(c) for pt in q for c in pt))
    tol = eps * scale * scale
    for i in range(n):
        if _cross2(q[i], q[(i + 1) % n], q[(i + 2) % n]) <= tol:
            return False
    return True


class Quadrilateral:
    """Convex quadrilateral, vertices TL, TR, BR, BL (clockwise on screen)."""

    __slots__ = ("vertices",)

    def __init__(self, vertices, validate: bool = True):
        v = np.array(vertices, dtype=float).reshape(4, 2)
        if validate:
            if not np.all(np.isfinite(v)):
                raise GeometryError("quadrilateral with non-finite vertex")
            if not is_convex_cw(v):
                raise GeometryError("quadrilateral must be convex, clockwise, without collinear vertices")
        v.setflags(write=False)
        self.vertices = v

    def __getitem__(self, i) -> Point2:
        return Point2(float(self.vertices[i, 0]), float(self.vertices[i, 1]))

    def __iter__(self):
        return (self[i] for i in range(4))

    def __len__(self):
        return 4

    def __repr__(self):
        pts = ", ".join(f"({x:.2f}, {y:.2f})" for x, y in self.vertices)
        return f"Quadrilateral({pts})"

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    def side(self, i: int) -> Segment2:
        return Segment2(self[i], self[(i + 1) % 4])

    def contains(self, pts: np.ndarray, eps: float = 0.0) -> np.ndarray:
        return points_in_convex(self.vertices, pts, eps)


def points_in_convex(poly: np.ndarray, pts: np.ndarray, eps: float = 0.0) -> np.ndarray:
    """Vectorized inside test for a clockwise convex polygon (boundary counts)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    inside = np.ones(len(pts), dtype=bool)
    n = len(poly)
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        e = b - a
        el = math.hypot(e[0], e[1])
        cr = (e[0] * (pts[:, 1] - a[1]) - e[1] * (pts[:, 0] - a[0])) / el
        inside &= cr >= -eps
    return inside


# hexangle vertex indices
TL, TR, CR, BR, BL, CL = range(6)


class Hexangle:
    """Outline of a page folded in half.

    Vertices are ordered TL, TR, CreaseRight, BR, BL, CreaseLeft.  The crease
    line passes through both crease vertices.  Cutting along the crease yields
    the upper quad (TL, TR, CR, CL) and the lower quad (CL, CR, BR, BL), both
    convex.
    """

    __slots__ = ("vertices", "crease_line")

    def __init__(self, vertices, crease_line: Line2 | None = None, validate: bool = True):
        v = np.array(vertices, dtype=float).reshape(6, 2)
        if crease_line is None:
            crease_line = Line2.through(v[CL], v[CR])
        if validate:
            q = v.tolist()
            if not all(math.isfinite(c) for pt in q for c in pt):
                raise GeometryError("hexangle with non-finite vertex")
            if not (is_convex_cw([q[TL], q[TR], q[CR], q[CL]]) and is_convex_cw([q[CL], q[CR], q[BR], q[BL]])):
                raise GeometryError("degenerate: collapsed hexangle")
            for i in (CL, CR):
                if crease_line.distance(q[i]) > 1e-6:
                    raise GeometryError("crease vertex off the crease line")
        v.setflags(write=False)
        self.vertices = v
        self.crease_line = crease_line

    @classmethod
    def from_points(cls, pts: Sequence, validate: bool = True) -> "Hexangle":
        return cls(np.asarray(pts, dtype=float), None, validate)

    def __getitem__(self, i) -> Point2:
        return Point2(float(self.vertices[i, 0]), float(self.vertices[i, 1]))

    def __repr__(self):
        pts = ", ".join(f"({x:.2f}, {y:.2f})" for x, y in self.vertices)
        return f"Hexangle({pts})"

    @property
    def upper(self) -> Quadrilateral:
        return Quadrilateral(self.vertices[[TL, TR, CR, CL]], validate=False)

    @property
    def lower(self) -> Quadrilateral:
        return Quadrilateral(self.vertices[[CL, CR, BR, BL]], validate=False)

    @property
    def top(self) -> Segment2:
        return Segment2(self[TL], self[TR])

    @property
    def crease(self) -> Segment2:
        return Segment2(self[CL], self[CR])

    @property
    def bottom(self) -> Segment2:
        return Segment2(self[BL], self[BR])

    def horizontal_lines(self) -> tuple[Line2, Line2, Line2]:
        return (self.top.line, self.crease_line, self.bottom.line)

    def segments(self) -> list[tuple[Segment2, str]]:
        """The seven scored segments with their orientation family."""
        v = self
        return [
            (Segment2(v[TL], v[TR]), "h"),
            (Segment2(v[TR], v[CR]), "v"),
            (Segment2(v[CR], v[BR]), "v"),
            (Segment2(v[BR], v[BL]), "h"),
            (Segment2(v[BL], v[CL]), "v"),
            (Segment2(v[CL], v[TL]), "v"),
            (Segment2(v[CL], v[CR]), "h"),
        ]

    def scaled(self, s: float) -> "Hexangle":
        v = self.vertices * s
        return Hexangle(v, Line2.through(v[CL], v[CR]), validate=False)

    def translated(self, dx: float, dy: float) -> "Hexangle":
        v = self.vertices + np.array([dx, dy])
        return Hexangle(v, Line2.through(v[CL], v[CR]), validate=False)

    def to_list(self) -> list:
        return self.vertices.tolist()


# ---------------------------------------------------------------------------
# concurrent line fitting and continuity correction


def _collinear(pts: np.ndarray) -> bool:
    c = pts - pts.mean(axis=0)
    sv = np.linalg.svd(c, compute_uv=False)
    return sv[0] == 0 or sv[1] <= 1e-10 * sv[0]


def _fit_residuals(theta, xs, ys):
    beta, gamma = theta[0], theta[1]
    b = theta[2:]
    s = beta - gamma * b
    den = np.sqrt(1 + s * s)
    e = s[:, None] * xs - ys + b[:, None]
    return e / den[:, None], s, den, e


def fit_concurrent_lines(segs: Sequence) -> tuple[HomoPoint, list[Line2]]:
    """Three concurrent lines closest to three segments.

    Minimizes the sum, over the three segments, of squared perpendicular
    distances of both endpoints to the matching line, subject to the three
    lines sharing one (possibly ideal) point.

    The problem is solved in a similarity-normalized frame in which the
    segments run roughly along the x axis.  There each line is written
    ``y = s_k x + b_k`` and concurrency through the homogeneous point
    ``(1, beta, gamma)`` is ``s_k = beta - gamma * b_k``; a damped Gauss-Newton
    iteration over ``(beta, gamma, b_1, b_2, b_3)`` finds the optimum.
    ``gamma == 0`` is the parallel (vanishing point at infinity) case, so no
    special handling is needed for it.

    Returns:
        (vertex, lines) where vertex is homogeneous in image coordinates.
    """
    if len(segs) != 3:
        raise ValueError("exactly three segments are required")
    p = np.array([[s[0][0], s[0][1], s[1][0], s[1][1]] for s in segs], dtype=float)
    pts = p.reshape(6, 2)
    if not np.all(np.isfinite(pts)) or _collinear(pts):
        raise GeometryError("degenerate: collapsed hexangle")

    # frame: centre, unit RMS radius, mean segment direction along +x
    dirs = p[:, 2:] - p[:, :2]
    lens = np.hypot(dirs[:, 0], dirs[:, 1])
    if np.any(lens == 0):
        raise GeometryError("degenerate: zero-length segment")
    u = dirs / lens[:, None]
    u[u @ u[0] < 0] *= -1
    md = u.sum(axis=0)
    ang = math.atan2(md[1], md[0])
    ca, sa = math.cos(ang), math.sin(ang)
    c = pts.mean(axis=0)
    sc = math.sqrt(((pts - c) ** 2).sum(axis=1).mean())
    rot = np.array([[ca, sa], [-sa, ca]]) / sc
    t = np.eye(3)
    t[:2, :2] = rot
    t[:2, 2] = -rot @ c
    q = (pts - c) @ rot.T
    xs = q[:, 0].reshape(3, 2)
    ys = q[:, 1].reshape(3, 2)
    dx = xs[:, 1] - xs[:, 0]
    if np.any(np.abs(dx) < 1e-9):
        raise GeometryError("degenerate: segments not roughly parallel")

    # per-segment lines, then best affine relation s = beta - gamma * b
    s0 = (ys[:, 1] - ys[:, 0]) / dx
    b0 = ys[:, 0] - s0 * xs[:, 0]
    if np.ptp(b0) < 1e-9:
        raise GeometryError("degenerate: collapsed hexangle")
    a = np.stack([np.ones(3), -b0], axis=1)
    bg, *_ = np.linalg.lstsq(a, s0, rcond=None)
    theta = np.concatenate([bg, b0])

    r, s, den, e = _fit_residuals(theta, xs, ys)
    cost = float((r * r).sum())
    mu = 1e-3
    for _ in range(100):
        # Jacobian of the 6 residuals w.r.t. (beta, gamma, b1, b2, b3)
        rs = xs / den[:, None] - e * (s / den ** 3)[:, None]
        jac = np.zeros((3, 2, 5))
        jac[:, :, 0] = rs
        jac[:, :, 1] = -theta[2:, None] * rs
        for k in range(3):
            jac[k, :, 2 + k] = 1 / den[k] - theta[1] * rs[k]
        jj = jac.reshape(6, 5)
        rr = r.reshape(6)
        g = jj.T @ rr
        hmat = jj.T @ jj
        improved = False
        for _ in range(30):
            step = np.linalg.solve(hmat + mu * np.diag(np.diag(hmat) + 1e-12), -g)
            cand = theta + step
            r2, s2, den2, e2 = _fit_residuals(cand, xs, ys)
            c2 = float((r2 * r2).sum())
            if c2 <= cost:
                improved = True
                break
            mu *= 10
        if not improved:
            break
        done = np.abs(step).max() < 1e-15 * (1 + np.abs(theta).max()) or cost - c2 <= 1e-30
        theta, r, s, den, e, cost = cand, r2, s2, den2, e2, c2
        mu = max(mu / 10, 1e-12)
        if done:
            break

    vert_f = np.array([1.0, theta[0], theta[1]])
    lines_f = [np.array([s[k], -1.0, theta[2 + k]]) for k in range(3)]
    # back to image coordinates: x_f = t x  =>  l = t^T l_f,  x = t^-1 x_f
    vert = np.linalg.solve(t, vert_f)
    vert /= np.abs(vert).max()
    lines = [Line2.from_array(t.T @ lf) for lf in lines_f]
    # orient every line's direction like its segment
    out = []
    for l, sg in zip(lines, segs):
        d = np.array([sg[1][0] - sg[0][0], sg[1][1] - sg[0][1]])
        if float(l.direction @ d) < 0:
            l = Line2(-l.a, -l.b, -l.c)
        out.append(l)
    return HomoPoint(*map(float, vert)), out


def apply_V(h: Hexangle) -> Hexangle:
    """Make the hexangle's top, crease and bottom lines concurrent.

    The three horizontal elements are replaced by the closest concurrent
    pencil; the outer corners are re-intersected with the supporting lines of
    their vertical sides, the crease vertices with those of the upper
    vertical sides.
    """
    v = h.vertices
    hv, (lt, lc, lb) = fit_concurrent_lines([h.top, h.crease, h.bottom])
    left_up = Line2.through(v[TL], v[CL])
    right_up = Line2.through(v[TR], v[CR])
    left_lo = Line2.through(v[CL], v[BL])
    right_lo = Line2.through(v[CR], v[BR])
    pairs = [(lt, left_up), (lt, right_up), (lc, right_up), (lb, right_lo), (lb, left_lo), (lc, left_up)]
    out = np.empty((6, 2))
    for i, (l1, l2) in enumerate(pairs):
        try:
            out[i] = intersect(l1, l2).to_point()
        except GeometryError as exc:
            raise GeometryError("correction failed") from exc
    return Hexangle(out, lc, validate=False)


def hexangle_homographies(h: Hexangle, out_w: float, out_h: float) -> tuple[Homography, Homography]:
    """Canvas-to-image homographies of the two halves.

    The upper half of the ``out_w x out_h`` canvas maps onto the upper quad,
    the lower half onto the lower quad.  Coordinates are continuous.
    """
    hh = out_h / 2.0
    up_src = np.array([[0, 0], [out_w, 0], [out_w, hh], [0, hh]], dtype=float)
    lo_src = np.array([[0, hh], [out_w, hh], [out_w, out_h], [0, out_h]], dtype=float)
    v = h.vertices
    h_up = homography_from_quad(up_src, v[[TL, TR, CR, CL]])
    h_lo = homography_from_quad(lo_src, v[[CL, CR, BR, BL]])
    return h_up, h_lo


# ---------------------------------------------------------------------------
# aspect ratio of a projected rectangle


def aspect_ratio(q, focal: float, principal) -> float:
    """Physical width/height ratio of the rectangle imaged as ``q``.

    Uses the known-focal-length form of the classic whiteboard method: the
    corner rays are combined into the two projected edge directions, whose
    metric lengths (through the inverse calibration matrix) give the ratio.
    Square pixels and zero skew are assumed.
    """
    if not focal > 0:
        raise ValueError("focal length must be positive")
    v = _quad_array(q)
    u0, v0 = float(principal[0]), float(principal[1])
    # m1 = TL, m2 = TR, m3 = BL, m4 = BR
    m1, m2, m4, m3 = [np.array([x - u0, y - v0, 1.0]) for x, y in v]
    d2 = float(np.dot(np.cross(m2, m4), m3))
    d3 = float(np.dot(np.cross(m3, m4), m2))
    if d2 == 0 or d3 == 0:
        raise GeometryError("ratio undefined")
    k2 = float(np.dot(np.cross(m1, m4), m3)) / d2
    k3 = float(np.dot(np.cross(m1, m4), m2)) / d3
    if not (k2 > 0 and k3 > 0):
        raise GeometryError("ratio undefined")
    n2 = k2 * m2 - m1
    n3 = k3 * m3 - m1
    f2 = focal * focal
    num = (n2[0] ** 2 + n2[1] ** 2) / f2 + n2[2] ** 2
    den = (n3[0] ** 2 + n3[1] ** 2) / f2 + n3[2] ** 2
    if not (num > 0 and den > 0) or not math.isfinite(num / den):
        raise GeometryError("ratio undefined")
    return math.sqrt(num / den)


def angle_between_deg(d1, d2) -> float:
    """Unsigned angle in [0, 90] between two undirected directions."""
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    c = abs(float(d1 @ d2)) / (np.linalg.norm(d1) * np.linalg.norm(d2))
    return math.degrees(math.acos(min(1.0, c)))
