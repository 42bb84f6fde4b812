"""Seeded synthetic scenes of a page folded in half, with exact ground truth.

The page is a ``page_w x page_h`` (mm) rectangle creased along its
horizontal middle.  The two halves are rigid rectangles meeting at the
crease with the given dihedral angle (180 = flat), optionally bent by a
curved, slanted fold (``curl``) that breaks the two-plane model.  The
scene is seen by a pinhole camera with square pixels and the principal point
at the image centre.

The reference page (what a perfect rectification would produce) is the
content raster on the ``out_w x out_h`` canvas; ground-truth homographies
map canvas coordinates to image coordinates for each half.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .geometry import BL, BR, CL, CR, TL, TR, Hexangle, Homography, Line2, homography_from_quad

PAGE_W_MM = 210.0
INK = 60
PAPER = 235
GRID = 190


class SceneError(ValueError):
    """Invalid scene specification (e.g. page behind the camera)."""


@dataclass
class SceneSpec:
    seed: int = 0
    width: int = 720
    height: int = 960
    page_ratio: float = 297.0 / 210.0
    fold_angle: float = 165.0            # dihedral angle between the halves, 180 = flat
    fold_sign: int = 1                   # +1: crease nearer to the camera than the edges
    focal_factor: float = 0.705          # focal length / image width
    yaw: float = 0.0                     # degrees, about the page's vertical axis
    pitch: float = 0.0                   # degrees, about the page's horizontal axis
    roll: float = 0.0                    # degrees, in-plane
    fill: float = 0.78                   # projected page height / image height (approx.)
    shift_x: float = 0.0                 # page centre offset, fraction of image width
    shift_y: float = 0.0
    background: str = "plain"            # plain | textured
    content: str = "glyphs"              # glyphs | grid
    noise_std: float = 2.0
    curl: float = 0.0
    crease_shadow: float = 0.3           # relative darkening at the crease
    crease_width: float = 6.0            # shadow strip width (+-2 sigma of the Gaussian profile), image px
    out_w: int = 2100
    out_h: int = 2970

    def validate(self) -> None:
        if self.curl < 0:
            raise SceneError("curl must be >= 0")
        if not 90.0 < self.fold_angle <= 180.0:
            raise SceneError("fold_angle must be in (90, 180]")
        if self.background not in ("plain", "textured"):
            raise SceneError("background must be 'plain' or 'textured'")
        if self.content not in ("glyphs", "grid"):
            raise SceneError("content must be 'glyphs' or 'grid'")
        if min(self.width, self.height) < 64:
            raise SceneError("image too small")
        if self.out_h % 2:
            raise SceneError("out_h must be even")


@dataclass
class GroundTruth:
    hexangle: Hexangle
    h_upper: Homography          # canvas -> image, upper half
    h_lower: Homography          # canvas -> image, lower half
    reference: np.ndarray        # out_h x out_w grayscale page
    spec: SceneSpec = field(default_factory=SceneSpec)

    def to_json(self) -> dict:
        return {
            "vertices": self.hexangle.to_list(),
            "vertex_order": ["TL", "TR", "CreaseRight", "BR", "BL", "CreaseLeft"],
            "h_upper": self.h_upper.to_list(),
            "h_lower": self.h_lower.to_list(),
            "canvas": [self.spec.out_w, self.spec.out_h],
            "spec": asdict(self.spec),
        }


# ---------------------------------------------------------------------------
# page content


def _glyph(page, x, top, w, bot, shape, t):
    """Letter-like ink pattern in the box [x, x+w) x [top, bot)."""
    w = max(w, t + 1)
    if shape == 0:                      # stem (i, l)
        page[top:bot, x:x + t] = INK
    elif shape == 1:                    # arch (n, h)
        page[top:bot, x:x + t] = INK
        page[top:bot, x + w - t:x + w] = INK
        page[top:top + t, x:x + w] = INK
    elif shape == 2:                    # cup (u)
        page[top:bot, x:x + t] = INK
        page[top:bot, x + w - t:x + w] = INK
        page[bot - t:bot, x:x + w] = INK
    elif shape == 3:                    # ring (o)
        page[top:bot, x:x + w] = INK
        page[top + t:bot - t, x + t:x + w - t] = PAPER
    else:                               # ring with a gap (c, e)
        page[top:bot, x:x + w] = INK
        page[top + t:bot - t, x + t:x + w] = PAPER
        page[(top + bot) // 2:(top + bot) // 2 + max(1, t // 2), x:x + w] = INK


def render_content(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    """Content raster of the full page on the output canvas (grayscale)."""
    w, h = spec.out_w, spec.out_h
    page = np.full((h, w), PAPER, dtype=np.uint8)
    mx, my = int(0.09 * w), int(0.07 * h)
    if spec.content == "grid":
        # light ruling, as on graph paper
        step = max(8, int(round(w / 20)))
        th = max(2, w // 500)
        for x in range(mx, w - mx + 1, step):
            page[my:h - my, x:x + th] = GRID
        for y in range(my, h - my + 1, step):
            page[y:y + th, mx:w - mx] = GRID
        return page
    line_h = max(6, int(round(h * 0.013)))
    pitch = int(round(line_h * 2.1))
    gap = max(1, int(round(0.18 * line_h)))
    space = max(2, int(round(0.8 * line_h)))
    xh = int(round(0.35 * line_h))          # ascender part above the x-height
    desc = int(round(0.3 * line_h))
    stroke = max(1, int(round(0.17 * line_h)))
    y = my
    while y + line_h + desc < h - my:
        if rng.random() < 0.08:           # paragraph break
            y += pitch
            continue
        x = mx
        right = w - mx
        if rng.random() < 0.15:           # short last line of a paragraph
            right = int(mx + (w - 2 * mx) * rng.uniform(0.3, 0.8))
        while x < right:
            n = int(rng.integers(2, 10))  # letters in the word
            widths = (rng.uniform(0.4, 0.75, n) * line_h).astype(int) + 1
            if x + widths.sum() + gap * (n - 1) > right:
                break
            kinds = rng.random(n)
            shapes = rng.integers(0, 5, n)
            for cw, k, sh in zip(widths, kinds, shapes):
                top = y if k < 0.35 else y + xh
                bot = y + line_h + (desc if k > 0.87 else 0)
                _glyph(page, x, top, cw, bot, int(sh), stroke)
                x += cw + gap
            x += space - gap
        y += pitch
    return page


def _background(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    h, w = spec.height, spec.width
    base = rng.uniform(40, 150, size=3)
    img = np.empty((h, w, 3), dtype=np.float32)
    img[:] = base.astype(np.float32)
    if spec.background == "textured":
        small = rng.normal(0, 1, size=(max(2, h // 24), max(2, w // 24))).astype(np.float32)
        low = cv2.resize(small, (w, h), interpolation=cv2.INTER_CUBIC)
        fine = cv2.GaussianBlur(rng.normal(0, 1, size=(h, w)).astype(np.float32), (0, 0), 1.2)
        grain = np.sin(np.linspace(0, rng.uniform(20, 60), w, dtype=np.float32))[None, :] * 6.0
        tex = 18.0 * low + 8.0 * fine + grain
        img += tex[:, :, None]
    # mild illumination falloff
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float32)
    r2 = ((xx - w / 2) / w) ** 2 + ((yy - h / 2) / h) ** 2
    img *= (1.0 - 0.25 * r2)[:, :, None]
    return img


# ---------------------------------------------------------------------------
# geometry of the scene


def _rot(yaw: float, pitch: float, roll: float) -> np.ndarray:
    a, b, c = map(math.radians, (yaw, pitch, roll))
    ry = np.array([[math.cos(a), 0, math.sin(a)], [0, 1, 0], [-math.sin(a), 0, math.cos(a)]])
    rx = np.array([[1, 0, 0], [0, math.cos(b), -math.sin(b)], [0, math.sin(b), math.cos(b)]])
    rz = np.array([[math.cos(c), -math.sin(c), 0], [math.sin(c), math.cos(c), 0], [0, 0, 1]])
    return rz @ rx @ ry


class _Scene:
    """Page surface and camera of a spec; maps page (u, v) mm to image pixels."""

    def __init__(self, spec: SceneSpec):
        self.spec = spec
        self.pw = PAGE_W_MM
        self.ph = PAGE_W_MM * spec.page_ratio
        self.f = spec.focal_factor * spec.width
        self.cx = spec.width / 2.0
        self.cy = spec.height / 2.0
        self.r = _rot(spec.yaw, spec.pitch, spec.roll)
        half = math.radians(180.0 - spec.fold_angle) / 2.0
        self.ca, self.sa = math.cos(half), math.sin(half)
        self.dist = self.f * self.ph / (spec.fill * spec.height)
        self.t = np.array([spec.shift_x * spec.width * self.dist / self.f,
                           spec.shift_y * spec.height * self.dist / self.f, 0.0])

    def crease_offset(self, u) -> np.ndarray:
        """Offset (mm, along v) of the fold from the page midline at ``u``.

        With curl the fold runs along a parabola that leaves the midline at
        the left side and ends ``curl * ph`` lower at the right side, so the
        fold is neither straight nor parallel to the top and bottom edges.
        """
        u = np.asarray(u, dtype=float)
        return self.spec.curl * self.ph * (u / self.pw) ** 2

    def surface(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """3-D points (N, 3) of page coordinates u in [0, pw], v in [0, ph]."""
        s = self.spec
        x = u - self.pw / 2.0
        d = v - self.ph / 2.0 - self.crease_offset(u)   # signed distance from the fold
        ad = np.abs(d)
        y = np.sign(d) * ad * self.ca
        z = -s.fold_sign * ad * self.sa
        return np.stack([x, y, z], axis=-1) + self.t

    def project(self, pts: np.ndarray) -> np.ndarray:
        c = pts @ self.r.T
        c[..., 2] += self.dist
        if np.any(c[..., 2] <= 1e-6):
            raise SceneError("page behind camera")
        return np.stack([self.f * c[..., 0] / c[..., 2] + self.cx,
                         self.f * c[..., 1] / c[..., 2] + self.cy], axis=-1)

    def page_to_image(self, u, v) -> np.ndarray:
        return self.project(self.surface(np.asarray(u, float), np.asarray(v, float)))


def _canvas_quads(spec: SceneSpec):
    w, h = float(spec.out_w), float(spec.out_h)
    up = np.array([[0, 0], [w, 0], [w, h / 2], [0, h / 2]])
    lo = np.array([[0, h / 2], [w, h / 2], [w, h], [0, h]])
    return up, lo


def scene_geometry(spec: SceneSpec):
    """(scene, hexangle, h_upper, h_lower) without rendering pixels."""
    spec.validate()
    sc = _Scene(spec)
    pw, ph = sc.pw, sc.ph
    u = np.array([0, pw, pw, pw, 0, 0], dtype=float)
    v = np.array([0, 0, ph / 2, ph, ph, ph / 2], dtype=float) + sc.crease_offset(u) * np.array([0, 0, 1, 0, 0, 1])
    verts = sc.page_to_image(u, v)
    hexa = Hexangle(verts, Line2.through(verts[CL], verts[CR]), validate=False)
    up, lo = _canvas_quads(spec)
    h_up = homography_from_quad(up, verts[[TL, TR, CR, CL]])
    h_lo = homography_from_quad(lo, verts[[CL, CR, BR, BL]])
    return sc, hexa, h_up, h_lo


def _inverse_map(sc: _Scene, spec: SceneSpec, h_up: Homography, h_lo: Homography):
    """Canvas coordinates (u, v) of every image pixel centre, plus half labels.

    For the exact two-plane model the inverse homographies are exact.  With
    curl the planar estimate is refined by a fixed-point iteration on the
    residual of the forward map.
    """
    H, W = spec.height, spec.width
    ys, xs = np.mgrid[0:H, 0:W].astype(np.float64)
    pts = np.stack([xs.ravel() + 0.5, ys.ravel() + 0.5], axis=1)
    inv_up, inv_lo = h_up.inverse(), h_lo.inverse()
    cu = inv_up.apply(pts)
    cl = inv_lo.apply(pts)
    hh = spec.out_h / 2.0
    upper = cu[:, 1] <= hh
    can = np.where(upper[:, None], cu, cl)
    if spec.curl > 0:
        kx = sc.pw / spec.out_w
        ky = sc.ph / spec.out_h
        # only pixels near the page are refined; far ones never sample it and
        # would extrapolate the surface behind the camera
        pad = 0.25
        near = ((can[:, 0] > -pad * spec.out_w) & (can[:, 0] < (1 + pad) * spec.out_w)
                & (can[:, 1] > -pad * spec.out_h) & (can[:, 1] < (1 + pad) * spec.out_h))
        sub, up_s = can[near], upper[near]
        target = np.where(up_s[:, None], cu[near], cl[near])
        lo_b = np.array([-pad * spec.out_w, -pad * spec.out_h])
        hi_b = np.array([(1 + pad) * spec.out_w, (1 + pad) * spec.out_h])
        for _ in range(8):
            fwd = sc.page_to_image(sub[:, 0] * kx, sub[:, 1] * ky)
            fin = np.where(up_s[:, None], inv_up.apply(fwd), inv_lo.apply(fwd))
            sub = np.clip(sub - (fin - target), lo_b, hi_b)
        can = can.copy()
        can[near] = sub
    return can.reshape(H, W, 2), upper.reshape(H, W)


def generate(spec: SceneSpec):
    """Render the scene; returns (RGB image, GroundTruth)."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    sc, hexa, h_up, h_lo = scene_geometry(spec)
    reference = render_content(spec, rng)
    bg = _background(spec, rng)

    can, _ = _inverse_map(sc, spec, h_up, h_lo)
    # prefilter the page to roughly the imaged resolution before sampling
    img_page_h = np.hypot(*(hexa.vertices[TL] - hexa.vertices[BL]))
    k = min(1.0, 1.5 * img_page_h / spec.out_h)
    sw, sh = max(8, int(round(spec.out_w * k))), max(8, int(round(spec.out_h * k)))
    small = cv2.resize(reference, (sw, sh), interpolation=cv2.INTER_AREA).astype(np.float32)
    pad = 4
    tex = np.zeros((sh + 2 * pad, sw + 2 * pad), dtype=np.float32)
    tex[pad:-pad, pad:-pad] = small
    mask = np.zeros_like(tex)
    mask[pad:-pad, pad:-pad] = 1.0
    mx = (can[..., 0] * (sw / spec.out_w) - 0.5 + pad).astype(np.float32)
    my = (can[..., 1] * (sh / spec.out_h) - 0.5 + pad).astype(np.float32)
    val = cv2.remap(tex, mx, my, cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0)
    cov = cv2.remap(mask, mx, my, cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0)
    page_val = np.divide(val, cov, out=np.zeros_like(val), where=cov > 1e-6)

    if spec.crease_shadow > 0:
        if spec.curl > 0:
            # distance to the curved fold measured on the canvas, in image pixels
            cu = can[..., 0] * (sc.pw / spec.out_w)
            fold_v = (sc.ph / 2.0 + sc.crease_offset(cu)) * (spec.out_h / sc.ph)
            d = (np.abs(can[..., 1] - fold_v) * (img_page_h / spec.out_h)).astype(np.float32)
        else:
            cl = hexa.crease_line
            H, W = spec.height, spec.width
            ys, xs = np.mgrid[0:H, 0:W].astype(np.float32)
            d = np.abs(cl.a * (xs + 0.5) + cl.b * (ys + 0.5) + cl.c)
        sig = spec.crease_width / 4.0
        page_val *= 1.0 - spec.crease_shadow * np.exp(-0.5 * (d / sig) ** 2)

    img = bg * (1.0 - cov[:, :, None]) + (page_val * cov)[:, :, None]
    if spec.noise_std > 0:
        img += rng.normal(0.0, spec.noise_std, size=img.shape).astype(np.float32)
    out = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return out, GroundTruth(hexa, h_up, h_lo, reference, spec)


def corner_error(found: Hexangle, truth: Hexangle) -> float:
    """Largest distance between corresponding vertices."""
    a = np.asarray(getattr(found, "vertices", found), dtype=float)
    b = np.asarray(getattr(truth, "vertices", truth), dtype=float)
    return float(np.hypot(*(a - b).T).max())


def _inside(spec: SceneSpec, margin: float = 0.03) -> bool:
    try:
        _, hexa, _, _ = scene_geometry(spec)
    except (SceneError, ValueError):
        return False
    v = hexa.vertices
    mx, my = margin * spec.width, margin * spec.height
    return bool((v[:, 0] > mx).all() and (v[:, 0] < spec.width - mx).all()
                and (v[:, 1] > my).all() and (v[:, 1] < spec.height - my).all())


def random_spec(seed: int, kind: str = "twofold", width: int = 720, height: int = 960, curl: float = 0.0) -> SceneSpec:
    """A varied, seeded scene.

    ``kind`` is "twofold" (fold angle 150-179 degrees with a crease shadow)
    or "planar" (a flat page seen in perspective, no crease).
    """
    rng = np.random.default_rng([seed, 7919])
    spec = SceneSpec(
        seed=int(seed),
        width=width,
        height=height,
        fold_angle=float(rng.uniform(150.0, 179.0)) if kind == "twofold" else 180.0,
        fold_sign=int(rng.choice([-1, 1])),
        yaw=float(rng.uniform(-12, 12)),
        pitch=float(rng.uniform(-15, 15)),
        roll=float(rng.uniform(-5, 5)),
        fill=float(rng.uniform(0.70, 0.84)),
        shift_x=float(rng.uniform(-0.03, 0.03)),
        shift_y=float(rng.uniform(-0.02, 0.02)),
        background=str(rng.choice(["plain", "textured"])),
        content="glyphs" if rng.random() < 0.8 else "grid",
        noise_std=float(rng.uniform(1.0, 3.0)),
        curl=float(curl),
        crease_shadow=float(rng.uniform(0.35, 0.55)) if kind == "twofold" else 0.0,
        # the shadow is a physical strip, so its width follows the image size
        crease_width=6.0 * max(width, height) / 960.0,
    )
    if kind not in ("twofold", "planar"):
        raise ValueError("kind must be 'twofold' or 'planar'")
    # shrink until the whole page is comfortably inside the frame
    while not _inside(spec) and spec.fill > 0.4:
        spec.fill *= 0.95
    return spec


def write_scene(out_dir: str | Path, name: str, img: np.ndarray, gt: GroundTruth) -> tuple[Path, Path]:
    from .imaging import save_image

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ip = out_dir / f"{name}.png"
    jp = out_dir / f"{name}.json"
    save_image(ip, img)
    jp.write_text(json.dumps(gt.to_json(), indent=2))
    return ip, jp
