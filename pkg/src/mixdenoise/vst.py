"""Variance stabilization for Poisson-Gaussian noise.

Forward transform 2*sqrt(y + 3/8 + sigma^2), its algebraic inverse, and
the exact unbiased inverse built by tabulating E[forward(y)] for a grid of
clean values under the Poisson-Gaussian mixture and inverting that curve
by interpolation.
"""
from __future__ import annotations

import csv
import io as _io
import os
import struct
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

LUT_MAGIC = b"GATLUT\x00\x00"
LUT_VERSION = 1

#: Default number of (nonzero) clean-value grid points in a lookup table.
DEFAULT_GRID_SIZE = 512


class QuadratureError(RuntimeError):
    """Raised when a lookup-table integral fails to converge."""


def gat_forward(y, sigma: float):
    """Stabilize Poisson-Gaussian values to unit-variance Gaussian.

    Elementwise 2*sqrt(y + 3/8 + sigma^2) where the argument is positive,
    0 otherwise.  Works on scalars or arrays.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    y = np.asarray(y, dtype=np.float64)
    shift = 0.375 + sigma * sigma
    out = np.where(y > -shift, 2.0 * np.sqrt(np.maximum(y + shift, 0.0)), 0.0)
    return out if out.ndim else float(out)


def gat_inverse_algebraic(v, sigma: float):
    """Straightforward algebraic inverse (v/2)^2 - 3/8 - sigma^2, floored at 0."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    v = np.asarray(v, dtype=np.float64)
    out = np.maximum((v / 2.0) ** 2 - 0.375 - sigma * sigma, 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GatLut:
    """Lookup table mapping stabilized-domain values to unbiased clean estimates.

    ``grid`` holds ascending stabilized values E[forward(y) | clean = v],
    ``values`` the corresponding clean values v.  Interpolating input
    stabilized values in (grid, values) yields the exact unbiased inverse.
    """

    sigma: float
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.array(self.grid, dtype=np.float64, copy=True)
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if grid.ndim != 1 or vals.ndim != 1 or len(grid) != len(vals):
            raise ValueError("grid and values must be 1D and equally long")
        if len(grid) < 2:
            raise ValueError("lookup table needs at least 2 entries")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("lookup-table grid must be strictly ascending")
        if np.any(np.diff(vals) < 0):
            raise ValueError("lookup-table values must be non-decreasing")
        grid.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def range(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def save(self, path: str | os.PathLike) -> None:
        """Write the versioned little-endian binary format."""
        with open(path, "wb") as fh:
            fh.write(LUT_MAGIC)
            fh.write(struct.pack("<Id", LUT_VERSION, self.sigma))
            fh.write(struct.pack("<I", len(self.grid)))
            fh.write(self.grid.astype("<f8").tobytes())
            fh.write(self.values.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "GatLut":
        with open(path, "rb") as fh:
            magic = fh.read(len(LUT_MAGIC))
            if magic != LUT_MAGIC:
                raise ValueError(f"not a lookup-table file: {path}")
            version, sigma = struct.unpack("<Id", fh.read(12))
            if version != LUT_VERSION:
                raise ValueError(f"unsupported lookup-table version {version}")
            (n,) = struct.unpack("<I", fh.read(4))
            payload = fh.read(16 * n)
            if len(payload) != 16 * n:
                raise ValueError(f"truncated lookup-table file: {path}")
            grid = np.frombuffer(payload[: 8 * n], dtype="<f8")
            values = np.frombuffer(payload[8 * n :], dtype="<f8")
        return cls(sigma, grid, values)

    def to_csv(self) -> str:
        """Human-inspectable CSV dump of (stabilized, clean) pairs."""
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["stabilized", "clean"])
        for g, v in zip(self.grid, self.values):
            writer.writerow([repr(g), repr(v)])
        return buf.getvalue()


def _poisson_truncation(x: float) -> int:
    # Chernoff-style tail bound; omitted mass < 1e-12 for all tabulated x.
    return int(np.ceil(x + 10.0 * np.sqrt(x) + 30.0))


def _gaussian_term_integrals(k_max: int, sigma: float,
                             max_refinements: int = 16) -> np.ndarray:
    """I[k] = integral of N(y; k, sigma^2) * forward(y) over y, k = 0..k_max.

    Trapezoid on [k - 8*sigma, k + 8*sigma], refined by doubling until the
    relative change drops below 1e-8.
    """
    shift = 0.375 + sigma * sigma
    ks = np.arange(k_max + 1, dtype=np.float64)
    out = np.empty(k_max + 1)
    for i, k in enumerate(ks):
        lo, hi = k - 8.0 * sigma, k + 8.0 * sigma
        prev = None
        n = 128
        for _ in range(max_refinements):
            y = np.linspace(lo, hi, n + 1)
            f = np.where(y > -shift, 2.0 * np.sqrt(np.maximum(y + shift, 0.0)), 0.0)
            density = np.exp(-((y - k) ** 2) / (2.0 * sigma * sigma))
            density /= np.sqrt(2.0 * np.pi) * sigma
            val = float(trapezoid(f * density, y))
            if prev is not None and abs(val - prev) <= 1e-8 * max(abs(val), 1e-30):
                break
            prev = val
            n *= 2
        else:
            raise QuadratureError(
                f"term integral for k={k} did not converge (sigma={sigma})")
        out[i] = val
    return out


def expected_forward(clean_values, sigma: float) -> np.ndarray:
    """E[forward(Poisson(x) + N(0, sigma^2))] for each clean value x.

    The Poisson sum is truncated where the omitted tail mass is below
    1e-12.  For sigma = 0 the Gaussian degenerates and the expectation is
    the pure Poisson sum of 2*sqrt(k + 3/8).
    """
    xs = np.atleast_1d(np.asarray(clean_values, dtype=np.float64))
    if np.any(xs < 0):
        raise ValueError("clean values must be >= 0")
    k_max = _poisson_truncation(float(xs.max()))
    ks = np.arange(k_max + 1, dtype=np.float64)
    if sigma == 0:
        term = 2.0 * np.sqrt(ks + 0.375)
    else:
        term = _gaussian_term_integrals(k_max, sigma)
    # pmf matrix is (len(xs), k_max+1); sizes stay small for typical grids
    pmf = stats.poisson.pmf(ks[None, :], xs[:, None])
    return pmf @ term


def build_exact_unbiased_lut(sigma: float, x_max: float,
                             n_grid: int = DEFAULT_GRID_SIZE) -> GatLut:
    """Tabulate the exact unbiased inverse for a fixed sigma.

    The clean-value grid is 0 plus ``n_grid`` logarithmically spaced points
    in [1e-3, x_max]; log spacing resolves the low-count curvature where
    the inverse deviates most from the algebraic one.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if not (x_max > 0):
        raise ValueError(f"x_max must be positive, got {x_max}")
    clean = np.concatenate([[0.0], np.geomspace(1e-3, x_max, n_grid)])
    stabilized = expected_forward(clean, sigma)
    if np.any(np.diff(stabilized) <= 0):
        raise QuadratureError("expected forward transform is not increasing")
    return GatLut(sigma, stabilized, clean)


def igat_exact_unbiased(v, lut: GatLut):
    """Exact unbiased inverse by linear interpolation in the lookup table.

    Inputs below the table range map to 0; inputs above it fall back to the
    algebraic inverse (the two coincide asymptotically).
    """
    v = np.asarray(v, dtype=np.float64)
    out = np.interp(v, lut.grid, lut.values)
    out = np.where(v < lut.grid[0], 0.0, out)
    high = v > lut.grid[-1]
    if np.any(high):
        out = np.where(high, gat_inverse_algebraic(v, lut.sigma), out)
    return out if out.ndim else float(out)


def lut_cache_path(cache_dir: str | os.PathLike, sigma: float, x_max: float,
                   n_grid: int = DEFAULT_GRID_SIZE) -> str:
    name = f"gatlut_v{LUT_VERSION}_s{sigma:.9g}_m{x_max:.9g}_n{n_grid}.lut"
    return os.path.join(cache_dir, name)


def load_or_build_lut(sigma: float, x_max: float,
                      n_grid: int = DEFAULT_GRID_SIZE,
                      cache_dir: str | os.PathLike | None = None) -> GatLut:
    """Return a cached lookup table, rebuilding (and re-persisting) on miss."""
    if cache_dir is None:
        return build_exact_unbiased_lut(sigma, x_max, n_grid)
    path = lut_cache_path(cache_dir, sigma, x_max, n_grid)
    if os.path.exists(path):
        try:
            lut = GatLut.load(path)
            if lut.sigma == sigma and len(lut.grid) == n_grid + 1:
                return lut
        except (ValueError, OSError):
            pass  # stale or corrupt cache entry; rebuild below
    lut = build_exact_unbiased_lut(sigma, x_max, n_grid)
    os.makedirs(cache_dir, exist_ok=True)
    lut.save(path)
    return lut
