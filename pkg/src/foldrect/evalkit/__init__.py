"""Dataset access, reference crop, metrics, OCR and the evaluation harness."""
from __future__ import annotations

from .fdi import CROP_MARGIN, VERTEX_COUNT, DatasetError, FdiRecord, crop_box, crop_c, load_fdi, parse_record
from .harness import (CSV_COLUMNS, EvalOptions, EvalReport, EvalRow, GroupStats, evaluate, evaluate_pair,
                      load_reference, no_algo, unfold_rectifier)
from .metrics import MetricError, MetricsRow, cer, levenshtein, ms_ssim, structural_dissimilarity
from .ocr import ALL_LANGUAGES, DEFAULT_TEMPLATE, OcrClient, OcrUnavailable, normalize_text, ocr_text

__all__ = [
    "ALL_LANGUAGES", "CROP_MARGIN", "CSV_COLUMNS", "DEFAULT_TEMPLATE", "VERTEX_COUNT", "DatasetError",
    "EvalOptions", "EvalReport", "EvalRow", "FdiRecord", "GroupStats", "MetricError", "MetricsRow", "OcrClient",
    "OcrUnavailable", "cer", "crop_box", "crop_c", "evaluate", "evaluate_pair", "levenshtein", "load_fdi",
    "load_reference", "ms_ssim", "no_algo", "normalize_text", "ocr_text", "parse_record",
    "structural_dissimilarity", "unfold_rectifier",
]
