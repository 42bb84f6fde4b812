"""Localization of a page folded in half: quads, crease, hexangle selection."""
from __future__ import annotations

from .alternatives import HexAlternative, LocateContext, form_alternatives, side_graphs
from .crease import (
    CreaseCandidate,
    crease_graph_hits,
    detect_crease_line_global,
    detect_crease_line_local,
    detect_crease_point,
)
from .paths import assign_path_graph, assign_path_graph_set
from .quads import ScoredQuad, enumerate_quads
from .refine import edge_points, edge_polarity, fit_line_tls, refine_hexangle, refine_segment, refine_strip
from .scoring import LineProfiles, ScoreBreakdown, contour_score, sample_map, score_hexangles
from .select import SelectionLog, select_hexangle

__all__ = [
    "CreaseCandidate",
    "HexAlternative",
    "LineProfiles",
    "LocateContext",
    "ScoreBreakdown",
    "ScoredQuad",
    "SelectionLog",
    "assign_path_graph",
    "assign_path_graph_set",
    "contour_score",
    "crease_graph_hits",
    "detect_crease_line_global",
    "detect_crease_line_local",
    "detect_crease_point",
    "edge_points",
    "edge_polarity",
    "enumerate_quads",
    "fit_line_tls",
    "form_alternatives",
    "refine_hexangle",
    "refine_segment",
    "refine_strip",
    "sample_map",
    "score_hexangles",
    "select_hexangle",
    "side_graphs",
]
