"""Folded Document Images dataset access and the reference crop C.

Layout::

    root/images/.../runlist.lst      file names, one per line
    root/images/.../2t_001.jpg
    root/annotation/.../2t_001.jpg.json
    root/reference/tiff/001.tiff

An image name is ``<x><t>_<nnn>.jpg`` with ``x`` the number of folds and
``t`` the scene (``h`` hand, ``t`` table).  Each annotation is a JSON
object with the keys ``reference``, ``language``, ``folding``, ``scene``
and ``vertices``.  Annotation files are looked up under the same relative
directory as the image, then directly under ``annotation/``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..geometry import Point2

log = logging.getLogger(__name__)

LANGUAGES = ("Arabic", "Chinese", "English", "Hindi", "Russian")
FOLDINGS = ("2fold", "3fold", "4fold", "8fold")
SCENES = ("hand", "table")
# number of annotated boundary/crease intersection points per folding type
VERTEX_COUNT = {"2fold": 6, "3fold": 8, "4fold": 9, "8fold": 15}
CROP_MARGIN = 20


class DatasetError(ValueError):
    """Raised when the dataset root does not have the expected layout."""


@dataclass(frozen=True)
class FdiRecord:
    id: str
    image_path: Path
    reference_tiff_path: Path
    language: str
    folding: str
    scene: str
    vertices: tuple[Point2, ...] = field(repr=False)


def _parse_vertices(raw) -> tuple[Point2, ...]:
    pts = []
    for v in raw:
        if isinstance(v, dict):
            x, y = v["x"], v["y"]
        else:
            x, y = v
        pts.append(Point2(float(x), float(y)))
    return tuple(pts)


def _scene_name(s: str) -> str:
    s = str(s).lower()
    return {"h": "hand", "t": "table"}.get(s, s)


def _folding_name(s) -> str:
    s = str(s).lower()
    return s if s.endswith("fold") else f"{s}fold"


def _resolve_reference(root: Path, ref) -> Path:
    ref = str(ref)
    tiff = root / "reference" / "tiff"
    for cand in (tiff / ref, root / "reference" / ref, tiff / (Path(ref).stem + ".tiff")):
        if cand.is_file():
            return cand
    if ref.isdigit():
        return tiff / f"{int(ref):03d}.tiff"
    return tiff / (Path(ref).stem + ".tiff")


def parse_record(root: Path, image_path: Path, ann: dict) -> FdiRecord:
    """Build one record from an annotation; raises ValueError on schema violations."""
    for key in ("reference", "language", "folding", "scene", "vertices"):
        if key not in ann:
            raise ValueError(f"missing key {key!r}")
    folding = _folding_name(ann["folding"])
    scene = _scene_name(ann["scene"])
    language = str(ann["language"])
    if folding not in FOLDINGS:
        raise ValueError(f"unknown folding {ann['folding']!r}")
    if scene not in SCENES:
        raise ValueError(f"unknown scene {ann['scene']!r}")
    if language not in LANGUAGES:
        raise ValueError(f"unknown language {language!r}")
    try:
        verts = _parse_vertices(ann["vertices"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed vertices: {exc}") from exc
    if len(verts) != VERTEX_COUNT[folding]:
        raise ValueError(f"{folding} needs {VERTEX_COUNT[folding]} vertices, got {len(verts)}")
    if not image_path.is_file():
        raise ValueError(f"image missing: {image_path}")
    with Image.open(image_path) as im:
        w, h = im.size
    for v in verts:
        if not (0 <= v.x <= w and 0 <= v.y <= h):
            raise ValueError(f"vertex {tuple(v)} outside the {w}x{h} image")
    return FdiRecord(image_path.stem, image_path, _resolve_reference(root, ann["reference"]), language, folding,
                     scene, verts)


def load_fdi(root_dir: str | Path, folding: str | None = None, scene: str | None = None,
             problems: list | None = None) -> list[FdiRecord]:
    """Records listed in the ``runlist.lst`` files under ``root/images``.

    ``folding``/``scene`` filter the result (None or "all" keeps
    everything).  Malformed entries are logged, appended to ``problems``
    as ``(name, reason)`` when given, and skipped.  Records are sorted by
    id.
    """
    root = Path(root_dir)
    if not all((root / d).is_dir() for d in ("images", "annotation", "reference")):
        raise DatasetError(f"dataset layout invalid: {root} needs images/, annotation/ and reference/")
    records = []
    for runlist in sorted((root / "images").rglob("runlist.lst")):
        rel = runlist.parent.relative_to(root / "images")
        for line in runlist.read_text(encoding="utf-8").splitlines():
            name = line.strip()
            if not name or name.startswith("#"):
                continue
            img = runlist.parent / name
            try:
                ann_path = root / "annotation" / rel / f"{name}.json"
                if not ann_path.is_file():
                    ann_path = root / "annotation" / f"{name}.json"
                ann = json.loads(ann_path.read_text(encoding="utf-8"))
                if not isinstance(ann, dict):
                    raise ValueError("annotation is not a JSON object")
                rec = parse_record(root, img, ann)
            except (OSError, ValueError) as exc:
                log.warning("skipping %s: %s", name, exc)
                if problems is not None:
                    problems.append((name, str(exc)))
                continue
            if folding not in (None, "all") and rec.folding != folding:
                continue
            if scene not in (None, "all") and rec.scene != scene:
                continue
            records.append(rec)
    return sorted(records, key=lambda r: r.id)


def crop_box(shape, vertices, margin: int = CROP_MARGIN) -> tuple[int, int, int, int]:
    """(x0, y0, x1, y1), half-open, of the vertices' bounding box grown by ``margin`` and clamped."""
    v = np.asarray([tuple(p) for p in vertices], dtype=float)
    if len(v) < 3:
        raise ValueError("need at least three vertices")
    lo, hi = v.min(axis=0), v.max(axis=0)
    if not np.all(hi > lo):
        raise ValueError("degenerate crop box (zero area)")
    h, w = shape[:2]
    x0 = max(int(np.floor(lo[0])) - margin, 0)
    y0 = max(int(np.floor(lo[1])) - margin, 0)
    x1 = min(int(np.ceil(hi[0])) + margin, w)
    y1 = min(int(np.ceil(hi[1])) + margin, h)
    if x1 <= x0 or y1 <= y0:
        raise ValueError("crop box lies outside the image")
    return x0, y0, x1, y1


def crop_c(img: np.ndarray, vertices, margin: int = CROP_MARGIN) -> np.ndarray:
    """Sub-image over the vertices' bounding box, pushed out by 20 px where the image allows."""
    x0, y0, x1, y1 = crop_box(img.shape, vertices, margin)
    return img[y0:y1, x0:x1]
