"""Bundled synthetic test images so experiments run with zero external assets."""
from __future__ import annotations

import numpy as np

from .image import Image

FIXTURE_NAMES = ("ramp", "shapes")


def make_ramp(size: int = 128, peak: float = 255.0) -> Image:
    """Smooth diagonal gradient covering the full intensity range."""
    idx = np.arange(size, dtype=np.float64)
    plane = (idx[:, None] + idx[None, :]) / (2 * (size - 1))
    return Image(plane * peak, peak)


def make_shapes(size: int = 128, peak: float = 255.0) -> Image:
    """Piecewise-constant scene: rectangles, a disc, and thin lines."""
    img = np.full((size, size), 0.20, dtype=np.float64)
    s = size
    img[s // 8: s // 2, s // 8: 3 * s // 8] = 0.75
    img[5 * s // 8: 7 * s // 8, s // 2: 7 * s // 8] = 0.45
    yy, xx = np.mgrid[0:s, 0:s]
    disc = (yy - 0.3 * s) ** 2 + (xx - 0.7 * s) ** 2 <= (0.15 * s) ** 2
    img[disc] = 0.95
    img[3 * s // 4, s // 8: s // 2] = 0.9  # thin horizontal line
    img[s // 2:, s // 16] = 0.05           # thin vertical line
    return Image(img * peak, peak)


def get_fixture(name: str, size: int = 128, peak: float = 255.0) -> Image:
    if name == "ramp":
        return make_ramp(size, peak)
    if name == "shapes":
        return make_shapes(size, peak)
    raise KeyError(f"unknown fixture {name!r}; have {FIXTURE_NAMES}")
