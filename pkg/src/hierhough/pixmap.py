"""8-bit grayscale rasters, PGM (P2/P5) I/O and point rendering.

Pixels are stored in PGM raster order: top row first, left to right.
Geometric coordinates used everywhere else in the package put y = 0 on
the *bottom* row, so ``(x, y)`` maps to raster row ``height - 1 - y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np


class PGMError(ValueError):
    """Base class for PGM decoding failures."""


class PGMHeaderError(PGMError):
    pass


class PGMMaxvalError(PGMError):
    pass


class PGMTruncatedError(PGMError):
    pass


class PGMDimensionError(PGMError):
    pass


# Anything larger is almost certainly a corrupt header.
MAX_PIXELS = 1 << 28


@dataclass(frozen=True)
class GrayImage:
    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be >= 1, got {self.width}x{self.height}")
        if len(self.pixels) != self.width * self.height:
            raise ValueError(
                f"pixel buffer has {len(self.pixels)} bytes, expected {self.width * self.height}"
            )

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        """Build from a (height, width) array in raster order."""
        a = np.asarray(arr)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        if a.size and (a.min() < 0 or a.max() > 255):
            raise ValueError("pixel values must lie in [0, 255]")
        a = a.astype(np.uint8)
        return cls(int(a.shape[1]), int(a.shape[0]), a.tobytes())

    @classmethod
    def blank(cls, width: int, height: int, value: int = 0) -> "GrayImage":
        return cls(width, height, bytes([value]) * (width * height))

    def to_array(self) -> np.ndarray:
        """Return a read-only (height, width) uint8 view in raster order."""
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width)

    def at(self, x: int, y: int) -> int:
        """Pixel value at geometric coordinates (y counted from the bottom)."""
        return self.pixels[(self.height - 1 - y) * self.width + x]


def _tokens(data: bytes, pos: int, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos] in b" \t\r\n\v\f":
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        if pos >= n:
            raise PGMHeaderError("unexpected end of header")
        start = pos
        while pos < n and data[pos] not in b" \t\r\n\v\f#":
            pos += 1
        out.append(data[start:pos])
    return out, pos


def _header_int(tok: bytes, what: str) -> int:
    if not tok.isdigit():
        raise PGMHeaderError(f"invalid {what}: {tok!r}")
    return int(tok)


def read_pgm(data: bytes) -> GrayImage:
    """Decode a P2 or P5 PGM file with maxval <= 255."""
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise PGMHeaderError("missing P2/P5 magic number")
    binary = data[:2] == b"P5"
    (w_tok, h_tok, max_tok), pos = _tokens(data, 2, 3)
    width = _header_int(w_tok, "width")
    height = _header_int(h_tok, "height")
    maxval = _header_int(max_tok, "maxval")
    if width < 1 or height < 1 or width * height > MAX_PIXELS:
        raise PGMDimensionError(f"unsupported dimensions {width}x{height}")
    if maxval < 1 or maxval > 255:
        raise PGMMaxvalError(f"maxval {maxval} outside [1, 255]")
    npix = width * height

    if binary:
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or data[pos] not in b" \t\r\n\v\f":
            raise PGMTruncatedError("missing raster data")
        raster = data[pos + 1:pos + 1 + npix]
        if len(raster) < npix:
            raise PGMTruncatedError(f"expected {npix} pixel bytes, found {len(raster)}")
        values = np.frombuffer(raster, dtype=np.uint8)
    else:
        fields = data[pos:].split()
        if len(fields) < npix:
            raise PGMTruncatedError(f"expected {npix} pixel values, found {len(fields)}")
        try:
            values = np.array([int(f) for f in fields[:npix]], dtype=np.int64)
        except ValueError as exc:
            raise PGMHeaderError(f"non-numeric pixel value: {exc}") from None
    if values.size and (values.min() < 0 or values.max() > maxval):
        raise PGMMaxvalError("pixel value exceeds maxval")
    if maxval != 255:
        values = (values.astype(np.int64) * 255 + maxval // 2) // maxval
    return GrayImage(width, height, values.astype(np.uint8).tobytes())


def write_pgm(img: GrayImage, binary: bool = True) -> bytes:
    header = f"P{5 if binary else 2}\n{img.width} {img.height}\n255\n".encode("ascii")
    if binary:
        return header + img.pixels
    rows = img.to_array()
    body = "\n".join(" ".join(str(v) for v in row) for row in rows)
    return header + body.encode("ascii") + b"\n"


def load_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path, img: GrayImage, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(img, binary))


def render_points(width: int, height: int, points: Iterable[tuple[int, int]]) -> GrayImage:
    """White points on a black canvas; points use geometric coordinates."""
    canvas = np.zeros((height, width), dtype=np.uint8)
    for x, y in points:
        if not (0 <= x < width and 0 <= y < height):
            raise ValueError(f"point ({x}, {y}) outside {width}x{height} image")
        canvas[height - 1 - y, x] = 255
    return GrayImage.from_array(canvas)
