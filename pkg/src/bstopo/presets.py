"""Shipped presets for generators and feature-detection thresholds."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def _text() -> str:
    return resources.files("bstopo").joinpath("presets.json").read_text()


def load_presets() -> dict:
    """A fresh copy of the versioned preset document."""
    return json.loads(_text())


def detection_defaults() -> dict:
    return load_presets()["detection"]
