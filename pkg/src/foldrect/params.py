"""Tunable constants of the localization / rectification pipeline.

All knobs live in one validated record so that a run is fully described by
``Params`` plus the input image.  Values can be overridden from a JSON file;
missing keys keep their defaults.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping


class ParamsError(ValueError):
    """Raised for invalid parameter values or malformed override files."""


# fields that must lie in (0, 1]
_FRACTIONS = ("rho_min", "rho_min_l1", "rho_min_l2", "ratio_tol", "rho_max_v", "refine_support")
# fields that must lie in (0, 180)
_ANGLES = ("phi_max_c", "phi_max_v")
_INTS = ("out_w", "out_h", "k_lines", "w_work", "beta", "beta_p", "nms_radius", "hough_spread", "min_chain")
# string-valued knobs and their allowed values
_CHOICES = {
    "crease_distance": ("normalized", "algebraic"),
    "hough_input": ("binary", "response"),
}


@dataclass(frozen=True)
class Params:
    """Every manual constant used by localization and warping.

    Distances are in working-resolution pixels unless noted otherwise.
    """

    # path-graph to quad-side assignment
    delta_min_e: float = 3.0
    rho_min: float = 0.5
    # boundary fracture (crease point) detection
    eps_c: float = 0.2
    eps_o: float = 1.0
    phi_max_c: float = 170.0
    # crease line detection
    delta_max_c: float = 15.0
    delta_min_b: float = 10.0
    rho_min_l1: float = 0.4
    rho_min_l2: float = 0.9
    beta: int = 3
    # contour score
    sigma: float = 1.83
    beta_p: int = 10
    # aspect-ratio gate
    lam: float = 0.705
    r0: float = 297.0 / 210.0
    ratio_tol: float = 0.3
    # rejection of large corrections
    phi_max_v: float = 2.56
    rho_max_v: float = 0.01
    # output canvas
    out_w: int = 2100
    out_h: int = 2970
    # engineering knobs (not part of the published method)
    k_lines: int = 12
    w_work: int = 640
    nms_radius: int = 4
    quad_min_area: float = 0.02
    quads_per_half: int = 12
    crease_distance: str = "normalized"
    hough_input: str = "response"
    hough_spread: int = 1
    min_chain: int = 16
    refine_radius: float = 2.0      # 0 disables the sub-pixel line refinement
    refine_support: float = 0.5

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in _CHOICES:
                if v not in _CHOICES[f.name]:
                    raise ParamsError(f"{f.name} must be one of {_CHOICES[f.name]}, got {v!r}")
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParamsError(f"{f.name} must be numeric, got {type(v).__name__}")
            if f.name in ("hough_spread", "refine_radius") and v == 0:
                continue
            if not math.isfinite(v) or v <= 0:
                raise ParamsError(f"{f.name} must be positive, got {v}")
            if f.name in _INTS and int(v) != v:
                raise ParamsError(f"{f.name} must be an integer, got {v}")
        for name in _FRACTIONS:
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ParamsError(f"{name} must be in (0, 1], got {v}")
        for name in _ANGLES:
            v = getattr(self, name)
            if not 0 < v < 180:
                raise ParamsError(f"{name} must be in (0, 180), got {v}")
        if self.out_h % 2:
            raise ParamsError("out_h must be even (the canvas is split in two halves)")
        if self.w_work < 64:
            raise ParamsError("w_work must be at least 64")

    def replace(self, **changes: Any) -> "Params":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "Params":
        known = {f.name: f for f in fields(cls)}
        # "lambda" is a Python keyword, so the focal factor is stored as ``lam``
        data = {("lam" if k == "lambda" else k): v for k, v in data.items()}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ParamsError(f"unknown parameter(s): {', '.join(unknown)}")
        kwargs = {}
        for k, v in data.items():
            if k in _INTS and isinstance(v, float) and v.is_integer():
                v = int(v)
            kwargs[k] = v
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "Params":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParamsError(f"cannot read params file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ParamsError("params file must contain a JSON object")
        return cls.from_mapping(data)


DEFAULT_PARAMS = Params()
