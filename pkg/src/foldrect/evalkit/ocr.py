"""OCR through an external command (Tesseract by default)."""
from __future__ import annotations

import re
import shlex
import subprocess
import tempfile
import threading
from pathlib import Path

import cv2
import numpy as np

DEFAULT_TEMPLATE = "tesseract {input} stdout -l {langs}"
# dataset language names to Tesseract language codes
TESSERACT_LANGS = {"Arabic": "ara", "Chinese": "chi_sim", "English": "eng", "Hindi": "hin", "Russian": "rus"}
ALL_LANGUAGES = tuple(TESSERACT_LANGS)

_WS = re.compile(r"\s+")


class OcrUnavailable(RuntimeError):
    """The OCR command is missing or failed."""


def normalize_text(s: str) -> str:
    """Collapse whitespace runs to one space and trim."""
    return _WS.sub(" ", s).strip()


class OcrClient:
    """Runs ``template`` (placeholders ``{input}`` and ``{langs}``) per image.

    ``{langs}`` becomes the ``+``-joined language codes.  At most
    ``max_concurrent`` commands run at the same time.
    """

    def __init__(self, template: str = DEFAULT_TEMPLATE, max_concurrent: int = 1, timeout: float = 300.0):
        if "{input}" not in template:
            raise ValueError("OCR command template needs an {input} placeholder")
        self.template = template
        self.timeout = timeout
        self._slots = threading.BoundedSemaphore(max(1, int(max_concurrent)))

    def command(self, input_path: str | Path, languages) -> list[str]:
        langs = "+".join(TESSERACT_LANGS.get(lang, lang) for lang in languages)
        return [tok.format(input=str(input_path), langs=langs) for tok in shlex.split(self.template)]

    def text(self, img: np.ndarray, languages=ALL_LANGUAGES) -> str:
        """Normalized text recognized in ``img``; raises OcrUnavailable on failure."""
        with tempfile.TemporaryDirectory(prefix="foldrect-ocr-") as tmp:
            path = Path(tmp) / "page.png"
            a = np.asarray(img)
            if a.ndim == 3:
                a = cv2.cvtColor(a, cv2.COLOR_RGB2BGR)
            if not cv2.imwrite(str(path), a):
                raise OcrUnavailable("cannot write OCR input image")
            cmd = self.command(path, languages)
            with self._slots:
                try:
                    res = subprocess.run(cmd, capture_output=True, timeout=self.timeout, check=False)
                except (OSError, subprocess.TimeoutExpired) as exc:
                    raise OcrUnavailable(f"ocr unavailable: {exc}") from exc
        if res.returncode != 0:
            err = res.stderr.decode("utf-8", "replace").strip()
            raise OcrUnavailable(f"ocr unavailable: exit {res.returncode}: {err[:200]}")
        return normalize_text(res.stdout.decode("utf-8", "replace"))


def ocr_text(img: np.ndarray, languages=ALL_LANGUAGES, client: OcrClient | None = None) -> str:
    """Text of ``img`` from ``client`` (default: Tesseract on the PATH)."""
    return (client or OcrClient()).text(img, languages)
