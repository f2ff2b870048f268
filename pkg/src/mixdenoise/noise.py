"""Synthetic mixed impulse + Poisson + Gaussian corruption.

Every pixel is either replaced by an impulse value (salt-and-pepper or
random-valued) or measured as Poisson(x) + N(0, sigma^2).  Values are not
clamped to [0, peak]: the Gaussian component may push pixels negative,
which the variance-stabilizing transform handles explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .image import Image, PixelMask


class ImpulseType(Enum):
    SALT_PEPPER = "salt-pepper"
    RANDOM_VALUED = "random-valued"


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of one corruption draw.

    sigma is the Gaussian standard deviation in intensity units,
    impulse_ratio the fraction of pixels hit by impulse noise.  With
    ``exact_count`` the number of impulse pixels is exactly
    round(ratio * N) instead of an independent Bernoulli draw per pixel
    (useful for table reproduction).
    """

    peak: float
    sigma: float
    impulse_ratio: float
    impulse_type: ImpulseType
    seed: int
    exact_count: bool = False

    def __post_init__(self):
        if not (self.peak > 0):
            raise ValueError(f"peak must be positive, got {self.peak}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not (0.0 <= self.impulse_ratio <= 1.0):
            raise ValueError(
                f"impulse_ratio must be in [0, 1], got {self.impulse_ratio}")


def corrupt(clean: Image, spec: NoiseSpec) -> tuple[Image, PixelMask]:
    """Corrupt a clean image; returns (noisy image, impulse-free mask).

    The returned mask is True exactly on pixels NOT hit by impulse noise.
    Output is fully determined by ``spec.seed``; the generator is numpy's
    PCG64, whose stream is stable across platforms.  Draw order is fixed:
    impulse membership, impulse values, Poisson counts, Gaussian noise.
    """
    x = clean.data
    if np.any(x < 0) or np.any(x > spec.peak):
        raise ValueError("clean pixels must lie in [0, peak]")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    shape = x.shape

    if spec.exact_count:
        n_hit = int(round(spec.impulse_ratio * x.size))
        hit = np.zeros(x.size, dtype=bool)
        hit[rng.permutation(x.size)[:n_hit]] = True
        hit = hit.reshape(shape)
    else:
        hit = rng.random(shape) < spec.impulse_ratio

    if spec.impulse_type is ImpulseType.SALT_PEPPER:
        impulses = np.where(rng.random(shape) < 0.5, 0.0, spec.peak)
    else:
        impulses = rng.uniform(0.0, spec.peak, shape)

    measured = rng.poisson(x).astype(np.float64)
    if spec.sigma > 0:
        measured += rng.normal(0.0, spec.sigma, shape)

    noisy = np.where(hit, impulses, measured)
    return Image(noisy, spec.peak), PixelMask(~hit)


def rescale_to_peak(img: Image, new_peak: float) -> Image:
    """Linearly rescale intensities so the old peak maps to ``new_peak``."""
    if not (new_peak > 0):
        raise ValueError(f"new_peak must be positive, got {new_peak}")
    return Image(img.data * (new_peak / img.peak), new_peak)
