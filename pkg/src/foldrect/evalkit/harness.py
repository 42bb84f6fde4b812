"""Batch evaluation over dataset records and the summary report."""
from __future__ import annotations

import csv
import io
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import cv2
import numpy as np

from ..imaging import load_image, to_grayscale
from .fdi import FdiRecord, crop_c
from .metrics import levenshtein, structural_dissimilarity
from .ocr import ALL_LANGUAGES, OcrClient, OcrUnavailable

log = logging.getLogger(__name__)

CSV_COLUMNS = ("id", "folding", "scene", "ss", "ed", "cer", "status")

# a rectifier maps an image to (status, output image)
Rectifier = Callable[[np.ndarray], tuple[str, np.ndarray]]


def no_algo(img: np.ndarray) -> tuple[str, np.ndarray]:
    """The baseline: the input image unchanged."""
    return "no-algo", img


def unfold_rectifier(params=None) -> Rectifier:
    """The built-in two-homography rectifier (trivial results return the input)."""
    from ..params import DEFAULT_PARAMS
    from ..pipeline import unfold

    p = params or DEFAULT_PARAMS

    def run(img: np.ndarray) -> tuple[str, np.ndarray]:
        res = unfold(img, p)
        return res.status, res.output

    return run


@dataclass
class EvalOptions:
    crop_c: bool = False
    ocr: OcrClient | None = None
    languages: tuple = ALL_LANGUAGES
    threads: int = 1


@dataclass(frozen=True)
class EvalRow:
    id: str
    folding: str
    scene: str
    ss: float | None
    ed: int | None
    cer: float | None
    status: str

    @property
    def failed(self) -> bool:
        return self.status.startswith("failed")


@dataclass(frozen=True)
class GroupStats:
    n: int
    failed: int
    ss: float | None
    ed: float | None
    cer: float | None


def _mean(vals):
    vals = [v for v in vals if v is not None]
    return float(np.mean(vals)) if vals else None


def _fmt(v, digits: int = 6) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{v:.{digits}f}"


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    @property
    def groups(self) -> dict[tuple[str, str], GroupStats]:
        """Means per (folding, scene) over the records that did not fail."""
        out = {}
        for key in sorted({(r.folding, r.scene) for r in self.rows}):
            rs = [r for r in self.rows if (r.folding, r.scene) == key]
            ok = [r for r in rs if not r.failed]
            out[key] = GroupStats(len(ok), len(rs) - len(ok), _mean(r.ss for r in ok), _mean(r.ed for r in ok),
                                  _mean(r.cer for r in ok))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.id, r.folding, r.scene, _fmt(r.ss), _fmt(r.ed), _fmt(r.cer), r.status])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    def table(self) -> str:
        """Human-readable summary, one line per (folding, scene)."""
        lines = [f"{'subset':<14} {'n':>4} {'failed':>6} {'CER':>8} {'ED':>10} {'SS':>8}"]
        for (folding, scene), g in self.groups.items():
            lines.append(f"{folding + '/' + scene:<14} {g.n:>4} {g.failed:>6} {_fmt(g.cer, 3) or '-':>8} "
                         f"{_fmt(g.ed, 1) or '-':>10} {_fmt(g.ss, 3) or '-':>8}")
        return "\n".join(lines)


def load_reference(path: str | Path) -> np.ndarray:
    """Reference page as a grayscale uint8 image at native resolution."""
    return to_grayscale(load_image(path))


class _TextCache:
    def __init__(self):
        self._lock = threading.Lock()
        self._data: dict = {}

    def get(self, key, fn):
        with self._lock:
            if key in self._data:
                return self._data[key]
        val = fn()
        with self._lock:
            self._data.setdefault(key, val)
            return self._data[key]


def evaluate_pair(img: np.ndarray, reference: np.ndarray, rectifier: Rectifier, options: EvalOptions,
                  vertices=None, ref_text: Callable[[], str] | None = None) -> tuple[str, float, int | None,
                                                                                      float | None]:
    """(status, ss, ed, cer) of one image against its grayscale reference."""
    if options.crop_c and vertices is not None:
        img = crop_c(img, vertices)
    status, out = rectifier(img)
    gray = to_grayscale(np.asarray(out))
    h, w = reference.shape[:2]
    if gray.shape != (h, w):
        gray = cv2.resize(gray, (w, h), interpolation=cv2.INTER_LINEAR)
    ss = structural_dissimilarity(gray, reference)
    ed = cer_v = None
    if options.ocr is not None:
        try:
            ref = ref_text() if ref_text is not None else options.ocr.text(reference, options.languages)
            hyp = options.ocr.text(gray, options.languages)
            ed = levenshtein(ref, hyp)
            cer_v = ed / len(ref) if ref else None
        except OcrUnavailable as exc:
            log.warning("OCR unavailable, ED/CER left empty: %s", exc)
    return status, ss, ed, cer_v


def evaluate(records: list[FdiRecord], rectifier: Rectifier | None = None,
             options: EvalOptions | None = None) -> EvalReport:
    """SS, ED and CER for every record; the rows are ordered by record id.

    ``rectifier`` None means the "no algorithm" baseline.  A record whose
    evaluation raises is kept with status ``failed: <reason>`` and left out
    of the group means.
    """
    opts = options or EvalOptions()
    rect = rectifier or no_algo
    texts = _TextCache()

    def one(rec: FdiRecord) -> EvalRow:
        try:
            img = load_image(rec.image_path)
            ref = load_reference(rec.reference_tiff_path)

            def ref_text():
                return texts.get(str(rec.reference_tiff_path), lambda: opts.ocr.text(ref, opts.languages))

            status, ss, ed, c = evaluate_pair(img, ref, rect, opts, rec.vertices, ref_text)
            return EvalRow(rec.id, rec.folding, rec.scene, ss, ed, c, status)
        except Exception as exc:  # per-record failures are reported, not fatal
            log.warning("record %s failed: %s", rec.id, exc)
            return EvalRow(rec.id, rec.folding, rec.scene, None, None, None, f"failed: {exc}")

    ordered = sorted(records, key=lambda r: r.id)
    if opts.threads > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as ex:
            rows = list(ex.map(one, ordered))
    else:
        rows = [one(r) for r in ordered]
    return EvalReport(rows)
