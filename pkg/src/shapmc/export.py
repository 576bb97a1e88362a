"""Byte-stable writers for attribution CSV, saliency CSV and P3 PPM images."""

from __future__ import annotations

import csv
import io
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError
from .experiments import fmt_real


def attribution_csv(values, names: Optional[Sequence[str]] = None, indices: Optional[Sequence[int]] = None) -> str:
    values = np.asarray(values, dtype=np.float64)
    if indices is None:
        indices = range(values.size)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["feature", "name", "attribution"])
    for i, v in zip(indices, values):
        name = names[i] if names is not None and i < len(names) else ""
        w.writerow([i, name, fmt_real(v)])
    return buf.getvalue()


def saliency_grid(values, width: int, height: int) -> np.ndarray:
    """Reshape a flat attribution vector to ``(height, width)``, row-major."""
    values = np.asarray(values, dtype=np.float64)
    if width < 1 or height < 1 or width * height != values.size:
        raise DimensionError(f"{values.size} attributions do not fill a {width}x{height} image")
    return values.reshape(height, width)


def saliency_csv(values, width: int, height: int) -> str:
    grid = saliency_grid(values, width, height)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "attribution"])
    for r in range(height):
        for c in range(width):
            w.writerow([r, c, fmt_real(grid[r, c])])
    return buf.getvalue()


def saliency_colors(values) -> np.ndarray:
    """Map signed values to RGB: white at zero, red for positive, blue for negative.

    ``s = v / max|v|``; ``s >= 0`` gives ``(255, 255 - f, 255 - f)`` and
    ``s < 0`` gives ``(255 - f, 255 - f, 255)`` with ``f = floor(255 |s|)``.
    An all-zero input maps to white.
    """
    v = np.asarray(values, dtype=np.float64)
    peak = np.max(np.abs(v)) if v.size else 0.0
    s = v / peak if peak > 0 else np.zeros_like(v)
    fade = 255 - np.floor(255 * np.abs(s)).astype(np.int64)
    full = np.full_like(fade, 255)
    pos = s >= 0
    r = np.where(pos, full, fade)
    g = fade
    b = np.where(pos, fade, full)
    return np.stack([r, g, b], axis=-1)


def saliency_ppm(values, width: int, height: int) -> str:
    """Plain-text (P3) PPM rendering of the saliency map, one image row per line."""
    rgb = saliency_colors(saliency_grid(values, width, height))
    lines = ["P3", f"{width} {height}", "255"]
    for r in range(height):
        lines.append(" ".join(f"{p[0]} {p[1]} {p[2]}" for p in rgb[r]))
    return "\n".join(lines) + "\n"
