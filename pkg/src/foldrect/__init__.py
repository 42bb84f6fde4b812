"""Localization and rectification of photographed documents folded in half."""
from __future__ import annotations

__version__ = "0.1.0"
