"""Image container, pixel mask, and the PSNR metric."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Returned by :func:`psnr` when the two images are identical (zero MSE).
INFINITE_PSNR = float("inf")


@dataclass(frozen=True)
class Image:
    """A single grayscale plane of real-valued intensities.

    Pixels are double precision throughout the pipeline; quantization to
    8/16 bits happens only at file export.  ``peak`` is the nominal maximum
    pixel value of the intensity range (not necessarily attained).
    Instances are immutable: the pixel buffer is copied on construction and
    marked read-only, so images can be shared freely.
    """

    data: np.ndarray
    peak: float = 255.0

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"image data must be 2D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must have at least one row and column")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite pixels")
        if not (self.peak > 0):
            raise ValueError(f"peak must be positive, got {self.peak}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "peak", float(self.peak))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def with_data(self, data: np.ndarray, peak: float | None = None) -> "Image":
        """New image with the same peak (unless overridden) and new pixels."""
        return Image(data, self.peak if peak is None else peak)


@dataclass(frozen=True)
class PixelMask:
    """Boolean per-pixel annotation with the same dimensions as its image."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.array(self.bits, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2D, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape


def _pixels(img) -> np.ndarray:
    """Accept an Image or a bare 2D array and return the pixel array."""
    return np.asarray(getattr(img, "data", img), dtype=np.float64)


def psnr(reference, estimate, peak: float | None = None) -> float:
    """Peak signal-to-noise ratio 10*log10(peak^2 / MSE) in decibels.

    Accepts :class:`Image` instances or bare 2D arrays.  ``peak`` defaults
    to the reference image's peak.  Returns :data:`INFINITE_PSNR` when the
    MSE is exactly zero.
    """
    ref = _pixels(reference)
    est = _pixels(estimate)
    if peak is None:
        peak = getattr(reference, "peak", None)
        if peak is None:
            raise ValueError("peak must be given for bare-array inputs")
    if ref.shape != est.shape:
        raise ValueError(f"dimension mismatch: {ref.shape} vs {est.shape}")
    if peak <= 0:
        raise ValueError(f"peak must be positive, got {peak}")
    if not (np.all(np.isfinite(ref)) and np.all(np.isfinite(est))):
        raise ValueError("PSNR inputs contain non-finite pixels")
    mse = float(np.mean((ref - est) ** 2))
    if mse == 0.0:
        return INFINITE_PSNR
    return float(10.0 * np.log10(peak * peak / mse))


def clamp_to_range(img: Image, lo: float, hi: float) -> Image:
    """Clamp every pixel into [lo, hi]; in-range pixels are unchanged."""
    if not (lo < hi):
        raise ValueError(f"lo must be < hi, got [{lo}, {hi}]")
    return img.with_data(np.clip(img.data, lo, hi))
