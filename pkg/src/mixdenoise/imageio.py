"""Bit-exact grayscale image file I/O (PGM P5/P2 and grayscale PNG).

PGM is the reference format because its bytes are trivially auditable;
PNG 8/16-bit grayscale is supported for convenience.  Quantization rounds
half-away-from-zero, pinned by test.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum

import numpy as np
from PIL import Image as PILImage

from .image import Image


class FileFormat(Enum):
    PGM8 = "pgm8"
    PGM16 = "pgm16"
    PNG8 = "png8"
    PNG16 = "png16"


_DEPTH = {FileFormat.PGM8: 255, FileFormat.PGM16: 65535,
          FileFormat.PNG8: 255, FileFormat.PNG16: 65535}


@dataclass(frozen=True)
class ImageFileMeta:
    format: FileFormat
    declared_max: int

    def __post_init__(self):
        if self.declared_max != _DEPTH[self.format]:
            raise ValueError(
                f"declared_max {self.declared_max} does not match "
                f"{self.format.value} depth {_DEPTH[self.format]}")


class ImageFormatError(ValueError):
    """Unsupported, malformed, or truncated image file."""


def _read_pgm(data: bytes, path) -> tuple[Image, ImageFileMeta]:
    # Netpbm header: magic, width, height, maxval; '#' starts a comment.
    tokens: list[bytes] = []
    pos = 2  # past magic
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"truncated PGM header: {path}")
        tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ImageFormatError(f"bad PGM header in {path}: {exc}") from exc
    if maxval not in (255, 65535):
        raise ImageFormatError(
            f"unsupported PGM maxval {maxval} in {path} (need 255 or 65535)")

    magic = data[:2]
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        count = width * height
        dtype = np.dtype(">u2") if maxval == 65535 else np.dtype(np.uint8)
        payload = data[pos:pos + count * dtype.itemsize]
        if len(payload) != count * dtype.itemsize:
            raise ImageFormatError(f"truncated PGM payload: {path}")
        pixels = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    else:  # P2, ASCII samples
        try:
            flat = np.array(data[pos:].split(), dtype=np.float64)
        except ValueError as exc:
            raise ImageFormatError(f"bad P2 sample in {path}: {exc}") from exc
        if flat.size != width * height:
            raise ImageFormatError(f"truncated P2 payload: {path}")
        pixels = flat
    if pixels.max(initial=0) > maxval:
        raise ImageFormatError(f"sample exceeds declared maxval in {path}")
    fmt = FileFormat.PGM16 if maxval == 65535 else FileFormat.PGM8
    img = Image(pixels.reshape(height, width), peak=float(maxval))
    return img, ImageFileMeta(fmt, maxval)


def _read_png(path) -> tuple[Image, ImageFileMeta]:
    with PILImage.open(path) as pil:
        if pil.mode == "L":
            fmt, maxval = FileFormat.PNG8, 255
        elif pil.mode in ("I", "I;16", "I;16B"):
            fmt, maxval = FileFormat.PNG16, 65535
        else:
            raise ImageFormatError(
                f"unsupported PNG mode {pil.mode!r} in {path} (grayscale only)")
        pixels = np.asarray(pil, dtype=np.float64)
    if pixels.ndim != 2:
        raise ImageFormatError(f"not a single-plane image: {path}")
    return Image(pixels, peak=float(maxval)), ImageFileMeta(fmt, maxval)


def read_image(path: str | os.PathLike) -> tuple[Image, ImageFileMeta]:
    """Read a PGM or grayscale PNG; pixels land in [0, declared_max]."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head[:2] in (b"P5", b"P2"):
        with open(path, "rb") as fh:
            return _read_pgm(fh.read(), path)
    if head == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    raise ImageFormatError(f"unrecognized image format: {path}")


def quantize(img: Image, declared_max: int) -> np.ndarray:
    """Rescale [0, peak] -> [0, declared_max], round half-away-from-zero, clamp."""
    scaled = img.data * (declared_max / img.peak)
    clamped = np.clip(scaled, 0.0, float(declared_max))
    return np.floor(clamped + 0.5).astype(np.uint32)


def write_image(img: Image, path: str | os.PathLike, meta: ImageFileMeta) -> None:
    """Write quantized pixels; emits deterministic bytes for identical inputs."""
    q = quantize(img, meta.declared_max)
    if meta.format in (FileFormat.PGM8, FileFormat.PGM16):
        header = (f"P5\n{img.width} {img.height}\n"
                  f"{meta.declared_max}\n").encode("ascii")
        dtype = np.dtype(">u2") if meta.format is FileFormat.PGM16 else np.uint8
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(q.astype(dtype).tobytes())
    else:
        if meta.format is FileFormat.PNG8:
            pil = PILImage.fromarray(q.astype(np.uint8), mode="L")
        else:
            pil = PILImage.fromarray(q.astype(np.uint16))  # mode I;16
        pil.save(path, format="PNG")
