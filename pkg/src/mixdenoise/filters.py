"""Adaptive median filters used to detect impulse pixels.

AMF (adaptive median filter) grows its window until the median is not an
extreme of the window, which makes it robust to high salt-and-pepper
ratios.  ACWMF (adaptive center-weighted median filter) compares a ladder
of center-weighted medians against MAD-scaled thresholds, which detects
random-valued impulses.  Both use reflective border padding.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .noise import ImpulseType


@dataclass(frozen=True)
class AmfParams:
    initial_window: int = 3
    max_window: int = 19

    def __post_init__(self):
        if self.initial_window % 2 == 0 or self.max_window % 2 == 0:
            raise ValueError("window sizes must be odd")
        if not (3 <= self.initial_window <= self.max_window):
            raise ValueError("need 3 <= initial_window <= max_window")


@dataclass(frozen=True)
class AcwmfParams:
    """Canonical parameter set, with thresholds scaled by peak/255.

    ``center_weight`` is the largest center weight; the ladder uses the
    odd weights 1, 3, ..., center_weight, one threshold per rung.
    """

    window: int = 3
    center_weight: int = 7
    thresholds: tuple[float, ...] = (40.0, 25.0, 10.0, 5.0)
    s: float = 0.6

    def __post_init__(self):
        if self.window % 2 == 0 or self.window < 3:
            raise ValueError("window must be odd and >= 3")
        if self.center_weight < 1 or self.center_weight % 2 == 0:
            raise ValueError("center_weight must be a positive odd integer")
        if len(self.thresholds) != (self.center_weight + 1) // 2:
            raise ValueError("need one threshold per center weight")
        if any(a < b for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be non-increasing")

    @classmethod
    def for_peak(cls, peak: float, **kwargs) -> "AcwmfParams":
        """Default thresholds rescaled to a non-255 intensity range."""
        scale = peak / 255.0
        return cls(thresholds=(40.0 * scale, 25.0 * scale,
                               10.0 * scale, 5.0 * scale), **kwargs)


def amf(img: np.ndarray, params: AmfParams = AmfParams()) -> np.ndarray:
    """Adaptive median filter over growing windows.

    Per pixel: if the window median lies strictly between the window min
    and max, output the pixel itself when it is also strictly inside,
    otherwise the median; else grow the window.  At the maximum window the
    median is used unconditionally.
    """
    img = np.asarray(img, dtype=np.float64)
    out = np.empty_like(img)
    undecided = np.ones(img.shape, dtype=bool)
    w = params.initial_window
    while True:
        # scipy 'reflect' == symmetric padding (edge pixel repeated)
        med = ndimage.median_filter(img, size=w, mode="reflect")
        mn = ndimage.minimum_filter(img, size=w, mode="reflect")
        mx = ndimage.maximum_filter(img, size=w, mode="reflect")
        ok = (mn < med) & (med < mx) & undecided
        keep = (mn < img) & (img < mx)
        out[ok] = np.where(keep[ok], img[ok], med[ok])
        undecided &= ~ok
        if w >= params.max_window or not undecided.any():
            out[undecided] = med[undecided]
            return out
        w += 2


def _windows(img: np.ndarray, window: int) -> np.ndarray:
    pad = window // 2
    padded = np.pad(img, pad, mode="symmetric")
    view = sliding_window_view(padded, (window, window))
    return view.reshape(img.shape[0], img.shape[1], window * window)


def acwmf(img: np.ndarray, params: AcwmfParams = AcwmfParams()) -> np.ndarray:
    """Adaptive center-weighted median filter.

    A pixel is replaced by the plain window median iff, for any center
    weight 2k+1, the center-weighted median deviates from the pixel by
    more than s * MAD + threshold_k.
    """
    img = np.asarray(img, dtype=np.float64)
    win = _windows(img, params.window)
    plain_med = np.median(win, axis=2)
    mad = np.median(np.abs(win - plain_med[..., None]), axis=2)
    detect = np.zeros(img.shape, dtype=bool)
    weights = range(1, params.center_weight + 1, 2)
    for thr, weight in zip(params.thresholds, weights):
        if weight == 1:
            m = plain_med
        else:
            extra = np.repeat(img[..., None], weight - 1, axis=2)
            m = np.median(np.concatenate([win, extra], axis=2), axis=2)
        detect |= np.abs(m - img) > params.s * mad + thr
    return np.where(detect, plain_med, img)


def init_outlier_field(img: np.ndarray, impulse_type: ImpulseType,
                       peak: float | None = None) -> np.ndarray:
    """Initial outlier magnitudes |filtered - img|.

    AMF for salt-and-pepper, ACWMF for random-valued impulses.  ``peak``
    rescales the ACWMF thresholds when the image range is not [0, 255].
    """
    img = np.asarray(img, dtype=np.float64)
    if impulse_type is ImpulseType.SALT_PEPPER:
        filtered = amf(img)
    else:
        params = AcwmfParams() if peak is None else AcwmfParams.for_peak(peak)
        filtered = acwmf(img, params)
    return np.abs(filtered - img)
