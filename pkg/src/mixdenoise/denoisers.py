"""Pluggable Gaussian denoisers used as the proximal step of the image prior.

Three built-ins: identity (no-op), Gaussian blur, and a patch-based
denoiser (block matching + per-patch orthonormal transform with hard
thresholding + weighted aggregation).  External denoisers can be plugged
in through the same interface.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage
from scipy.fft import dctn, idctn

#: Hard-threshold multiplier for the patch transform coefficients.
HARD_THRESHOLD_FACTOR = 2.7


class DenoiserKind(Enum):
    IDENTITY = "identity"
    GAUSSIAN_BLUR = "gaussian-blur"
    PATCH_TRANSFORM = "patch-transform"


@dataclass(frozen=True)
class DenoiserSpec:
    """Denoiser selection; ``strength`` is the assumed noise std of the input."""

    kind: DenoiserKind = DenoiserKind.PATCH_TRANSFORM
    strength: float = 1.0
    patch_size: int = 7
    search_radius: int = 9
    max_matches: int = 8

    def __post_init__(self):
        if self.strength < 0:
            raise ValueError(f"strength must be >= 0, got {self.strength}")
        if self.kind is DenoiserKind.PATCH_TRANSFORM:
            if self.patch_size < 3 or self.patch_size % 2 == 0:
                raise ValueError("patch_size must be odd and >= 3")
            if self.search_radius < 0 or self.max_matches < 1:
                raise ValueError("invalid search parameters")

    def with_strength(self, strength: float) -> "DenoiserSpec":
        return DenoiserSpec(self.kind, strength, self.patch_size,
                            self.search_radius, self.max_matches)


def denoise(img: np.ndarray, spec: DenoiserSpec) -> np.ndarray:
    """Run the selected denoiser on a 2D array of intensities."""
    img = np.asarray(img, dtype=np.float64)
    if spec.kind is DenoiserKind.IDENTITY:
        return img.copy()
    if spec.kind is DenoiserKind.GAUSSIAN_BLUR:
        if spec.strength == 0:
            return img.copy()
        return ndimage.gaussian_filter(img, sigma=spec.strength, mode="reflect")
    return _patch_transform(img, spec)


def _patch_transform(img: np.ndarray, spec: DenoiserSpec) -> np.ndarray:
    h, w = img.shape
    ps = spec.patch_size
    if h < ps or w < ps:
        raise ValueError(f"image {img.shape} smaller than patch size {ps}")

    patches = sliding_window_view(img, (ps, ps))  # (h-ps+1, w-ps+1, ps, ps)
    ph, pw = patches.shape[:2]
    threshold = HARD_THRESHOLD_FACTOR * spec.strength

    num = np.zeros_like(img)
    den = np.zeros_like(img)
    step = max(1, ps // 2)
    rows = sorted(set(list(range(0, ph, step)) + [ph - 1]))
    cols = sorted(set(list(range(0, pw, step)) + [pw - 1]))
    for i in rows:
        r0, r1 = max(0, i - spec.search_radius), min(ph, i + spec.search_radius + 1)
        for j in cols:
            c0, c1 = max(0, j - spec.search_radius), min(pw, j + spec.search_radius + 1)
            ref = patches[i, j]
            cand = patches[r0:r1, c0:c1]
            dist = np.sum((cand - ref) ** 2, axis=(2, 3)).ravel()
            order = np.argsort(dist, kind="stable")[: spec.max_matches]
            rr, cc = np.unravel_index(order, (r1 - r0, c1 - c0))
            group = cand[rr, cc]  # (m, ps, ps)

            coeffs = dctn(group, axes=(1, 2), norm="ortho")
            keep = np.abs(coeffs) > threshold
            keep[:, 0, 0] = True  # always keep the DC coefficient
            est = idctn(np.where(keep, coeffs, 0.0), axes=(1, 2), norm="ortho")
            weights = 1.0 / (1.0 + keep.sum(axis=(1, 2)))

            for m in range(group.shape[0]):
                y, x = r0 + rr[m], c0 + cc[m]
                num[y:y + ps, x:x + ps] += weights[m] * est[m]
                den[y:y + ps, x:x + ps] += weights[m]

    uncovered = den == 0
    num[uncovered] = img[uncovered]
    den[uncovered] = 1.0
    return num / den
